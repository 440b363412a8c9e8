"""Dataset model: taxonomy, CSV ingestion, synthetic data, folds and masking.

On-disk formats
---------------
Taxonomy CSV: one record per question with columns
    alias,group,subsets,value_kind,text
where group is one of D/A/G, subsets is a ';'-joined list of tags
(DP1, AP1, AP2, GP1, G1..G5) and value_kind is binary or numeric.

Dataset CSV: UTF-8, comma-separated, header row of question aliases with
``user_id`` first.  An optional ``self_label`` column (integer 0..3, may be
empty) is allowed anywhere after ``user_id``.  Binary cells are ``0``/``1``,
numeric cells are non-negative decimals.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataValueError,
    DuplicateUserError,
    ParameterError,
    SchemaError,
    UnknownSubsetError,
)

GROUPS = ("D", "A", "G")
SUBSET_TAGS = ("DP1", "AP1", "AP2", "GP1", "G1", "G2", "G3", "G4", "G5")

# Tags are only legal on questions of the matching group.
_TAG_GROUP = {
    "DP1": "D",
    "AP1": "A",
    "AP2": "A",
    "GP1": "G",
    "G1": "G",
    "G2": "G",
    "G3": "G",
    "G4": "G",
    "G5": "G",
}


@dataclass(frozen=True)
class Question:
    id: int
    alias: str
    text: str
    group: str
    subset_tags: frozenset[str]
    value_kind: str  # "binary" or "numeric"


@dataclass
class QuestionCatalog:
    """Ordered question list plus named column subsets.

    ``named_subsets`` always contains the groups present (D/A/G), every
    subset tag present, S0 = DP1 + AP1 when applicable, and DATA (all ids).
    """

    questions: list[Question]
    named_subsets: dict[str, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        self._validate_questions()
        if not self.named_subsets:
            self.named_subsets = self._build_subsets()

    def _validate_questions(self):
        seen = set()
        for pos, q in enumerate(self.questions):
            if q.id != pos:
                raise SchemaError(f"question id {q.id} does not match its position {pos}")
            if q.alias in seen:
                raise SchemaError(f"duplicate question alias {q.alias!r}")
            seen.add(q.alias)
            if q.group not in GROUPS:
                raise SchemaError(f"question {q.alias!r}: unknown group {q.group!r}")
            for tag in q.subset_tags:
                if tag not in _TAG_GROUP:
                    raise SchemaError(f"question {q.alias!r}: unknown subset tag {tag!r}")
                if _TAG_GROUP[tag] != q.group:
                    raise SchemaError(
                        f"question {q.alias!r}: tag {tag} is not valid on group {q.group}"
                    )
            if q.value_kind not in ("binary", "numeric"):
                raise SchemaError(f"question {q.alias!r}: bad value_kind {q.value_kind!r}")
            if q.value_kind == "numeric" and "G2" not in q.subset_tags:
                raise SchemaError(f"question {q.alias!r}: numeric values are only valid on G2")

    def _build_subsets(self) -> dict[str, list[int]]:
        subsets: dict[str, list[int]] = {}
        for g in GROUPS:
            ids = [q.id for q in self.questions if q.group == g]
            if ids:
                subsets[g] = ids
        for tag in SUBSET_TAGS:
            ids = [q.id for q in self.questions if tag in q.subset_tags]
            if ids:
                subsets[tag] = ids
        if "DP1" in subsets and "AP1" in subsets:
            subsets["S0"] = sorted(subsets["DP1"] + subsets["AP1"])
        subsets["DATA"] = [q.id for q in self.questions]
        return subsets

    @property
    def width(self) -> int:
        return len(self.questions)

    @property
    def aliases(self) -> list[str]:
        return [q.alias for q in self.questions]

    def subset_ids(self, names: list[str]) -> list[int]:
        """Union of the named subsets, in catalog order."""
        ids: set[int] = set()
        for name in names:
            if name not in self.named_subsets:
                raise UnknownSubsetError(name)
            ids.update(self.named_subsets[name])
        return sorted(ids)


@dataclass
class UserProfile:
    user_id: str
    answers: np.ndarray  # float64, aligned to catalog order
    self_label: int | None = None
    assigned_label: int | None = None


@dataclass
class Dataset:
    catalog: QuestionCatalog
    users: list[UserProfile]

    def __post_init__(self):
        ids = [u.user_id for u in self.users]
        if len(set(ids)) != len(ids):
            raise DuplicateUserError("duplicate user_id in dataset")
        for u in self.users:
            if len(u.answers) != self.catalog.width:
                raise SchemaError(
                    f"user {u.user_id}: {len(u.answers)} answers for width {self.catalog.width}"
                )

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def user_ids(self) -> list[str]:
        return [u.user_id for u in self.users]

    def matrix(self) -> np.ndarray:
        """Answers stacked to an (n_users, width) float64 matrix."""
        if not self.users:
            return np.zeros((0, self.catalog.width))
        return np.stack([u.answers for u in self.users]).astype(np.float64)

    def self_labels(self) -> np.ndarray:
        """Self-assessed labels as an int array; raises if any is missing."""
        labels = []
        for u in self.users:
            if u.self_label is None:
                raise ParameterError(f"user {u.user_id} has no self_label")
            labels.append(u.self_label)
        return np.asarray(labels, dtype=np.int64)


@dataclass(frozen=True)
class FoldSplit:
    fold_assignments: np.ndarray  # fold index per user
    seed: int
    n_folds: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments != fold)


# ---------------------------------------------------------------------------
# taxonomy i/o
# ---------------------------------------------------------------------------

def load_taxonomy(path: str | Path) -> QuestionCatalog:
    questions = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"alias", "group", "subsets", "value_kind", "text"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise SchemaError(f"taxonomy header must be {sorted(expected)}, got {reader.fieldnames}")
        for i, rec in enumerate(reader):
            tags = frozenset(t for t in rec["subsets"].split(";") if t)
            questions.append(
                Question(
                    id=i,
                    alias=rec["alias"],
                    text=rec["text"],
                    group=rec["group"],
                    subset_tags=tags,
                    value_kind=rec["value_kind"],
                )
            )
    if not questions:
        raise SchemaError(f"taxonomy file {path} has no question records")
    return QuestionCatalog(questions)


def write_taxonomy(catalog: QuestionCatalog, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alias", "group", "subsets", "value_kind", "text"])
        for q in catalog.questions:
            writer.writerow([q.alias, q.group, ";".join(sorted(q.subset_tags)), q.value_kind, q.text])


def reference_catalog() -> QuestionCatalog:
    """The catalog shipped as ``data/taxonomy_reference.csv``.

    Reproduces the reference question-group structure: D=202 (DP1=123),
    A=113 (AP1=65, AP2=6), G=129 split into G1=35, G2=3 (numeric),
    G3=19, G4=56, G5=16, with GP1 = G1+G3+G4 = 110 and 444 questions total.
    Question texts are placeholders; only counts and structure are meaningful.
    """
    questions: list[Question] = []

    def add(alias, text, group, tags, kind="binary"):
        questions.append(
            Question(len(questions), alias, text, group, frozenset(tags), kind)
        )

    for i in range(202):
        privacy = i < 123
        tags = ["DP1"] if privacy else []
        kind_txt = "share" if privacy else "enable"
        add(f"d{i + 1:03d}", f"Fitness: {kind_txt} workout data item {i + 1} with the app", "D", tags)
    for i in range(113):
        if i < 65:
            tags, txt = ["AP1"], f"App: allow access to device capability {i + 1}"
        elif i < 71:
            tags, txt = ["AP2"], f"App: do you consider the provider trustworthy (aspect {i - 64})"
        else:
            tags, txt = [], f"App: enable interface option {i + 1}"
        add(f"a{i + 1:03d}", txt, "A", tags)
    for i in range(129):
        if i < 35:
            tags, txt, kind = ["G1", "GP1"], f"Disclose identity attribute {i + 1} to the app", "binary"
        elif i < 38:
            tags, txt, kind = ["G2"], f"Time spent measure {i - 34}", "numeric"
        elif i < 57:
            tags, txt, kind = ["G3", "GP1"], f"Reveal personal identity detail {i - 37}", "binary"
        elif i < 113:
            tags, txt, kind = ["G4", "GP1"], f"Share private information item {i - 56} with the app", "binary"
        else:
            tags, txt, kind = ["G5"], f"Privacy concern statement {i - 112}", "binary"
        add(f"g{i + 1:03d}", txt, "G", tags, kind)

    return QuestionCatalog(questions)


def reference_taxonomy_path() -> Path:
    """Path of the packaged reference taxonomy CSV."""
    return Path(__file__).parent / "data" / "taxonomy_reference.csv"


# ---------------------------------------------------------------------------
# dataset i/o
# ---------------------------------------------------------------------------

def load_dataset(csv_path: str | Path, taxonomy: str | Path | QuestionCatalog) -> Dataset:
    """Load a dataset CSV against a taxonomy.

    The CSV header must contain ``user_id`` first and then exactly the
    taxonomy aliases (any order); numeric columns are min-max normalized to
    [0, 1] across users.
    """
    if isinstance(taxonomy, QuestionCatalog):
        catalog = taxonomy
    else:
        catalog = load_taxonomy(taxonomy)

    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: empty file") from None
        rows = list(reader)

    if not header or header[0] != "user_id":
        raise SchemaError("first CSV column must be user_id")
    answer_cols = []  # (csv position, question)
    label_col = None
    by_alias = {q.alias: q for q in catalog.questions}
    seen_aliases = set()
    for pos, name in enumerate(header[1:], start=1):
        if name == "self_label":
            if label_col is not None:
                raise SchemaError("duplicate self_label column")
            label_col = pos
            continue
        if name not in by_alias:
            raise SchemaError(f"CSV column {name!r} is missing from the taxonomy")
        if name in seen_aliases:
            raise SchemaError(f"duplicate CSV column {name!r}")
        seen_aliases.add(name)
        answer_cols.append((pos, by_alias[name]))
    missing = [q.alias for q in catalog.questions if q.alias not in seen_aliases]
    if missing:
        raise SchemaError(f"taxonomy alias {missing[0]!r} is missing from the CSV header")

    users: list[UserProfile] = []
    seen_ids: set[str] = set()
    for r, row in enumerate(rows, start=2):  # header is line 1
        if len(row) != len(header):
            raise SchemaError(f"line {r}: {len(row)} cells, expected {len(header)}")
        user_id = row[0]
        if user_id in seen_ids:
            raise DuplicateUserError(f"duplicate user_id {user_id!r} at line {r}")
        seen_ids.add(user_id)
        answers = np.zeros(catalog.width)
        for pos, q in answer_cols:
            cell = row[pos].strip()
            if q.value_kind == "binary":
                if cell not in ("0", "1"):
                    raise DataValueError(
                        f"line {r}, column {q.alias!r}: bad binary value {cell!r}",
                        row=r,
                        column=q.alias,
                    )
                answers[q.id] = float(cell)
            else:
                try:
                    value = float(cell)
                except ValueError:
                    value = float("nan")
                if not np.isfinite(value) or value < 0:
                    raise DataValueError(
                        f"line {r}, column {q.alias!r}: bad numeric value {cell!r}",
                        row=r,
                        column=q.alias,
                    )
                answers[q.id] = value
        self_label = None
        if label_col is not None and row[label_col].strip():
            cell = row[label_col].strip()
            if cell not in ("0", "1", "2", "3"):
                raise DataValueError(
                    f"line {r}, column 'self_label': bad label {cell!r}", row=r, column="self_label"
                )
            self_label = int(cell)
        users.append(UserProfile(user_id, answers, self_label=self_label))

    _normalize_numeric_columns(catalog, users)
    return Dataset(catalog, users)


def _normalize_numeric_columns(catalog: QuestionCatalog, users: list[UserProfile]) -> None:
    # Min-max to [0,1] so time-spent columns are commensurable with binary ones.
    if not users:
        return
    for q in catalog.questions:
        if q.value_kind != "numeric":
            continue
        col = np.array([u.answers[q.id] for u in users])
        lo, hi = col.min(), col.max()
        scaled = (col - lo) / (hi - lo) if hi > lo else np.zeros_like(col)
        for u, v in zip(users, scaled):
            u.answers[q.id] = v


def write_dataset_csv(dataset: Dataset, path: str | Path, include_self_label: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["user_id"]
        if include_self_label:
            header.append("self_label")
        header += dataset.catalog.aliases
        writer.writerow(header)
        for u in dataset.users:
            row = [u.user_id]
            if include_self_label:
                row.append("" if u.self_label is None else str(u.self_label))
            for q, v in zip(dataset.catalog.questions, u.answers):
                row.append(_format_cell(v, q.value_kind))
            writer.writerow(row)


def _format_cell(value: float, kind: str) -> str:
    if kind == "binary":
        return str(int(value))
    return repr(float(value))


def write_labels_csv(user_ids: list[str], labels: np.ndarray, path: str | Path) -> None:
    """Ground-truth planted labels as a two-column CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "planted_label"])
        for uid, lab in zip(user_ids, labels):
            writer.writerow([uid, int(lab)])


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def select_subset(dataset: Dataset, subset_names: list[str]) -> Dataset:
    """Column-project the dataset to the union of the named subsets."""
    ids = dataset.catalog.subset_ids(subset_names)
    old_questions = dataset.catalog.questions
    new_questions = [
        dataclasses.replace(old_questions[qid], id=new_id) for new_id, qid in enumerate(ids)
    ]
    catalog = QuestionCatalog(new_questions)
    sel = np.asarray(ids, dtype=np.intp)
    users = [
        dataclasses.replace(u, answers=u.answers[sel].copy()) for u in dataset.users
    ]
    return Dataset(catalog, users)


def generate_synthetic(
    n_users: int,
    catalog_width: int,
    n_planted: int,
    noise: float,
    seed: int,
) -> tuple[Dataset, np.ndarray]:
    """Planted-profile binary dataset: each user is a noisy copy of its
    group prototype (every bit flipped independently with ``noise``).

    Returns the dataset and the true planted labels (user i belongs to
    group i mod n_planted).  Deterministic given the seed.
    """
    if n_users < 1 or catalog_width < 1:
        raise ParameterError("n_users and catalog_width must be positive")
    if not 1 <= n_planted <= n_users:
        raise ParameterError("need 1 <= n_planted <= n_users")
    if not 0.0 <= noise <= 1.0:
        raise ParameterError(f"noise must be in [0,1], got {noise}")

    rng = np.random.default_rng(seed)
    prototypes = rng.integers(0, 2, size=(n_planted, catalog_width))
    labels = np.arange(n_users, dtype=np.int64) % n_planted
    flips = rng.random((n_users, catalog_width)) < noise
    answers = np.where(flips, 1 - prototypes[labels], prototypes[labels]).astype(np.float64)

    questions = [
        Question(i, f"s{i + 1:03d}", f"Synthetic setting {i + 1}", "G", frozenset(), "binary")
        for i in range(catalog_width)
    ]
    catalog = QuestionCatalog(questions)
    users = [UserProfile(f"u{i + 1:04d}", answers[i]) for i in range(n_users)]
    return Dataset(catalog, users), labels


def set_self_labels(dataset: Dataset, labels: np.ndarray) -> Dataset:
    """Copy of the dataset with self_label set per user."""
    if len(labels) != dataset.n_users:
        raise ParameterError("labels length does not match user count")
    users = [
        dataclasses.replace(u, self_label=int(lab)) for u, lab in zip(dataset.users, labels)
    ]
    return Dataset(dataset.catalog, users)


def kfold_split(
    dataset: Dataset,
    n_folds: int = 10,
    seed: int = 0,
    stratify_by: str | np.ndarray | None = None,
) -> FoldSplit:
    """Partition users into folds whose sizes differ by at most one.

    With ``stratify_by`` (a label field name or an explicit label array),
    per-fold label proportions stay within one user of the global ones.
    """
    n = dataset.n_users
    if n_folds < 2 or n_folds > n:
        raise ParameterError(f"n_folds must be in [2, {n}], got {n_folds}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    if stratify_by is None:
        perm = rng.permutation(n)
        assignments[perm] = np.arange(n) % n_folds
    else:
        if isinstance(stratify_by, str):
            labels = np.array([getattr(u, stratify_by) for u in dataset.users])
            if any(v is None for v in labels):
                raise ParameterError(f"stratify_by={stratify_by!r}: some users lack the label")
            labels = labels.astype(np.int64)
        else:
            labels = np.asarray(stratify_by, dtype=np.int64)
            if len(labels) != n:
                raise ParameterError("stratify labels length does not match user count")
        # Deal each class round-robin, continuing the fold counter across
        # classes so overall fold sizes stay balanced too.
        offset = 0
        for lab in np.unique(labels):
            members = np.flatnonzero(labels == lab)
            members = members[rng.permutation(len(members))]
            assignments[members] = (offset + np.arange(len(members))) % n_folds
            offset = (offset + len(members)) % n_folds
    return FoldSplit(fold_assignments=assignments, seed=seed, n_folds=n_folds)


def mask_settings(
    user: UserProfile, alpha: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split a user's setting indices into (query, ground truth) parts.

    The query part holds ~alpha of the indices (nearest integer, at least one
    index on each side); sampling is uniform without replacement.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0,1), got {alpha}")
    n = len(user.answers)
    if n < 2:
        raise ParameterError("user must have at least 2 settings to mask")
    n_query = int(np.floor(alpha * n + 0.5))
    n_query = min(max(n_query, 1), n - 1)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    query = np.sort(perm[:n_query])
    held_out = np.sort(perm[n_query:])
    return query, held_out
