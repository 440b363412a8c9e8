"""Experiment runners behind the evaluation harness.

Three protocols:

- label consistency: ten-fold classifier CV against self-assessed labels with
  pooled one-vs-rest ROC per class, plus a nearest-neighbor label audit.
- subset clustering: k-medoids compactness/silhouette swept over named
  question subsets and kappa.
- recommendation sweep: mask part of each test user's settings, classify the
  rest into a cluster, recommend top-N from that cluster, score precision and
  recall against the held-out part over a grid of (alpha, k).

Every runner is deterministic given its seed arguments and returns an
ExperimentReport whose artifact paths are relative to the output directory.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import TrainConfig, predict_label, predict_scores, train
from .clustering import Clustering, compactness, kmedoids, silhouette
from .corpus import Dataset, kfold_split, mask_settings, select_subset
from .errors import ParameterError, TrainingDataError, UnknownSubsetError
from .metrics import PrCurve, precision_recall, roc_curve, write_pr_csv, write_roc_csv
from .recommender import RatingsMatrix, recommend_top_n
from .similarity import distance_matrix, similarity_matrix, tfidf_weights

logger = logging.getLogger(__name__)

# Benchmark numbers reported on the original proprietary survey corpus.
# Informational annotations only; nothing in this package treats them as
# pass/fail targets because that corpus is not redistributable.
PUBLISHED_REFERENCE = {
    "label_consistency": {
        "auc_per_class": [0.83, 0.85, 0.76],
        "cross_class_rate": 0.962,
    },
    "subset_clustering": {"best_compactness_note": "below 40 on the G+AP2 subset"},
    "recommendation_sweep": {
        "precision_maxima_by_k": {"3": 0.52, "5": 0.70, "10": 0.80, "15": 0.85},
        "recall_max": 0.73,
    },
}

DEFAULT_SUITES: dict[str, list[tuple[str, list[str]]]] = {
    "QS1": [
        ("D", ["D"]),
        ("A", ["A"]),
        ("G", ["G"]),
        ("G+AP2", ["G", "AP2"]),
        ("COM.", ["D", "A", "G"]),
    ],
    "QS2": [
        ("DP1", ["DP1"]),
        ("AP1", ["AP1"]),
        ("GP1", ["GP1"]),
        ("COM.", ["DP1", "AP1", "GP1"]),
    ],
    "QS3": [
        ("G1", ["G1"]),
        ("G2", ["G2"]),
        ("G3", ["G3"]),
        ("G4", ["G4"]),
        ("G5", ["G5"]),
        ("COM.", ["G1", "G2", "G3", "G4", "G5"]),
    ],
    # every question; the only suite defined on any catalog
    "ALL": [("DATA", ["DATA"])],
}


@dataclass
class ExperimentReport:
    experiment_id: str
    config: dict
    per_fold: list
    aggregate: dict
    seeds: list[int]
    artifacts: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def save_report(report: ExperimentReport, out_dir: str | Path, name: str | None = None) -> Path:
    """Write the report as pretty JSON; returns the path."""
    name = name or f"{report.experiment_id}.json"
    path = Path(out_dir) / name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _fold_config(base: TrainConfig, seed: int, fold: int) -> TrainConfig:
    # distinct init stream per (seed, fold) pair
    return dataclasses.replace(base, seed=base.seed + seed * 1009 + fold)


# ---------------------------------------------------------------------------
# label consistency (self-assessed labels vs behavior)
# ---------------------------------------------------------------------------

def run_selflabel_consistency(
    dataset: Dataset,
    out_dir: str | Path,
    n_folds: int = 10,
    seed: int = 0,
    neighbor_threshold: float | None = None,
    permute_labels: bool = False,
    train_config: TrainConfig | None = None,
) -> ExperimentReport:
    """Ten-fold CV of the classifier against self-assessed labels, with
    fold-pooled per-class ROC, plus the rate of users whose nearest neighbor
    carries a different label.

    ``permute_labels`` shuffles the label column before everything else, the
    negative control.  ``neighbor_threshold`` restricts the audit to users
    whose nearest neighbor reaches that similarity; default considers every
    user's nearest neighbor.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = train_config or TrainConfig()
    raw = dataset.self_labels()
    vocab = np.unique(raw)
    if len(vocab) < 2:
        raise ParameterError("need at least 2 distinct self-assessed labels")
    codes = np.searchsorted(vocab, raw)
    if permute_labels:
        codes = np.random.default_rng(seed).permutation(codes)

    features = dataset.matrix()
    folds = kfold_split(dataset, n_folds, seed=seed, stratify_by=codes)
    pooled = np.zeros((dataset.n_users, len(vocab)))
    per_fold = []
    for f in range(n_folds):
        tr, te = folds.train_indices(f), folds.test_indices(f)
        model = train(features[tr], codes[tr], _fold_config(cfg, seed, f), n_classes=len(vocab))
        scores = predict_scores(model, features[te])
        pooled[te] = scores
        acc = float((np.argmax(scores, axis=1) == codes[te]).mean())
        per_fold.append({"fold": f, "n_test": int(len(te)), "accuracy": acc})

    artifacts = []
    auc = {}
    for c in range(len(vocab)):
        curve = roc_curve(pooled, codes, c)
        auc[str(int(vocab[c]))] = curve.auc
        artifacts.append(write_roc_csv(curve, out_dir).name)

    # nearest-neighbor label audit over the weighted similarity matrix
    sims = similarity_matrix(tfidf_weights(dataset), dataset.user_ids).values.copy()
    np.fill_diagonal(sims, -1.0)
    nearest = np.argmax(sims, axis=1)  # first occurrence wins ties
    nearest_sim = sims[np.arange(len(sims)), nearest]
    qualifying = np.ones(len(sims), dtype=bool)
    if neighbor_threshold is not None:
        qualifying = nearest_sim >= neighbor_threshold
    warnings = []
    if qualifying.any():
        cross_rate = float((codes[nearest] != codes)[qualifying].mean())
    else:
        cross_rate = 0.0
        warnings.append("no user has a neighbor above the similarity threshold")

    report = ExperimentReport(
        experiment_id="label_consistency",
        config={
            "n_folds": n_folds,
            "seed": seed,
            "neighbor_threshold": neighbor_threshold,
            "permute_labels": permute_labels,
            "train": dataclasses.asdict(cfg),
            "label_vocabulary": [int(v) for v in vocab],
        },
        per_fold=per_fold,
        aggregate={
            "auc_per_class": auc,
            "cross_class_rate": cross_rate,
            "n_qualifying": int(qualifying.sum()),
            "published_reference": PUBLISHED_REFERENCE["label_consistency"],
        },
        seeds=[seed],
        artifacts=artifacts,
        warnings=warnings,
    )
    return report


# ---------------------------------------------------------------------------
# subset clustering comparison
# ---------------------------------------------------------------------------

def run_subset_clustering(
    dataset: Dataset,
    out_dir: str | Path,
    suites: tuple[str, ...] = ("QS1", "QS2", "QS3"),
    kappa_range: tuple[int, ...] = (2, 3, 4, 5, 6, 7),
    seeds: tuple[int, ...] = (0,),
    restarts: int = 20,
    definitions: dict[str, list[tuple[str, list[str]]]] | None = None,
) -> ExperimentReport:
    """Compactness and mean silhouette of k-medoids over named question
    subsets, for each kappa, averaged over seeds.  One CSV per suite."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    definitions = definitions or DEFAULT_SUITES
    warnings = []
    per_cell = []
    aggregate: dict = {}
    artifacts = []
    for suite in suites:
        if suite not in definitions:
            raise UnknownSubsetError(f"unknown suite {suite!r}")
        seen = set()
        rows = []
        suite_agg: dict = {}
        for name, groups in definitions[suite]:
            if name in seen:
                msg = f"suite {suite}: duplicate subset {name!r} skipped"
                logger.warning(msg)
                warnings.append(msg)
                continue
            seen.add(name)
            projected = select_subset(dataset, groups)
            dist = distance_matrix(
                similarity_matrix(tfidf_weights(projected), projected.user_ids)
            )
            subset_agg = {}
            for kappa in kappa_range:
                comp_vals, sil_vals = [], []
                for s in seeds:
                    clustering = kmedoids(dist, kappa, seed=s, restarts=restarts)
                    comp = compactness(clustering, dist)
                    _, sil = silhouette(clustering, dist)
                    comp_vals.append(comp)
                    sil_vals.append(sil)
                    per_cell.append(
                        {
                            "suite": suite,
                            "subset": name,
                            "width": projected.catalog.width,
                            "kappa": kappa,
                            "seed": s,
                            "compactness": comp,
                            "silhouette": sil,
                        }
                    )
                subset_agg[str(kappa)] = {
                    "compactness": float(np.mean(comp_vals)),
                    "silhouette": float(np.mean(sil_vals)),
                }
                rows.append((name, kappa, subset_agg[str(kappa)]))
            suite_agg[name] = subset_agg
        aggregate[suite] = suite_agg

        path = out_dir / f"rq2_{suite.lower()}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subset", "kappa", "compactness", "silhouette"])
            for name, kappa, vals in rows:
                writer.writerow([name, kappa, repr(vals["compactness"]), repr(vals["silhouette"])])
        artifacts.append(path.name)

    aggregate["published_reference"] = PUBLISHED_REFERENCE["subset_clustering"]
    return ExperimentReport(
        experiment_id="subset_clustering",
        config={
            "suites": list(suites),
            "kappa_range": list(kappa_range),
            "restarts": restarts,
        },
        per_fold=per_cell,
        aggregate=aggregate,
        seeds=list(seeds),
        artifacts=artifacts,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# masked recommendation sweep
# ---------------------------------------------------------------------------

def _mask_seed(seed: int, user_index: int) -> int:
    return seed * 100003 + user_index


def run_recommendation_sweep(
    dataset: Dataset,
    clustering: Clustering,
    out_dir: str | Path,
    alpha_set: tuple[float, ...] = (0.1, 0.3, 0.5),
    k_set: tuple[int, ...] = (3, 5, 10, 15),
    n_max: int = 50,
    seeds: tuple[int, ...] = (0,),
    n_folds: int = 10,
    train_config: TrainConfig | None = None,
    weighting: str = "raw",
) -> ExperimentReport:
    """Masked-settings recommendation benchmark over an (alpha, k) grid.

    Per seed: ten-fold split stratified by cluster label; per fold a
    classifier is trained on the train users' full rows; each test user is
    masked (the same mask across alphas is nested, seeded per user), routed to
    a cluster by the classifier with unknown answers zeroed, and served top-N
    recommendations from the train-side members of that cluster.  Confusion
    counts against the held-out part are summed per fold, turned into
    precision/recall per cutoff N, averaged over folds, then over seeds.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = train_config or TrainConfig()
    features = dataset.matrix()
    labels = clustering.assignment
    kappa = clustering.kappa
    width = dataset.catalog.width
    aliases = dataset.catalog.aliases
    warnings = []
    n_skipped = 0
    n_skipped_folds = 0

    # per_seed[(alpha, k)] -> list over seeds of (precision[n_max], recall[n_max])
    per_seed_curves: dict[tuple[float, int], list[tuple[np.ndarray, np.ndarray]]] = {
        (a, k): [] for a in alpha_set for k in k_set
    }
    per_seed_degenerate: dict[tuple[float, int], int] = {key: 0 for key in per_seed_curves}
    per_fold_records = []

    for s in seeds:
        folds = kfold_split(dataset, n_folds, seed=s, stratify_by=labels)
        # fold_counts[(alpha, k)] -> [tp, fp, fn, tn] arrays over N, summed per fold
        seed_fold_metrics: dict[tuple[float, int], list[tuple[np.ndarray, np.ndarray]]] = {
            key: [] for key in per_seed_curves
        }
        completed_folds = 0
        for f in range(n_folds):
            tr, te = folds.train_indices(f), folds.test_indices(f)
            try:
                model = train(
                    features[tr], labels[tr], _fold_config(cfg, s, f), n_classes=kappa
                )
            except TrainingDataError as exc:
                n_skipped_folds += 1
                msg = f"seed {s} fold {f} skipped: {exc}"
                logger.warning(msg)
                if len(warnings) < 20:
                    warnings.append(msg)
                continue
            completed_folds += 1
            cluster_matrices: list[RatingsMatrix | None] = []
            for c in range(kappa):
                members = tr[labels[tr] == c]
                if len(members) == 0:
                    cluster_matrices.append(None)
                else:
                    cluster_matrices.append(
                        RatingsMatrix(
                            features[members],
                            [dataset.users[i].user_id for i in members],
                            aliases,
                        )
                    )
            counts = {
                key: [np.zeros(n_max) for _ in range(4)] for key in per_seed_curves
            }
            for g in te:
                user = dataset.users[g]
                row = features[g]
                for a in alpha_set:
                    query_idx, held_idx = mask_settings(user, a, seed=_mask_seed(s, int(g)))
                    masked = row.copy()
                    masked[held_idx] = 0.0
                    c = predict_label(model, masked)
                    matrix = cluster_matrices[c]
                    if matrix is None:
                        n_skipped += 1
                        msg = f"seed {s} fold {f}: cluster {c} empty on the train side, user {user.user_id} skipped"
                        logger.warning(msg)
                        if len(warnings) < 20:
                            warnings.append(msg)
                        continue
                    target = np.full(width, np.nan)
                    target[query_idx] = row[query_idx]
                    truth = row[held_idx]
                    total_pos = float(truth.sum())
                    n_unknown = len(held_idx)
                    held_value = {aliases[i]: row[i] for i in held_idx}
                    for k in k_set:
                        rec = recommend_top_n(matrix, target, k=k, n=n_max, weighting=weighting)
                        hits = np.array([held_value[e.alias] for e in rec.entries])
                        L = len(hits)
                        tp = np.zeros(n_max)
                        if L:
                            cum = np.cumsum(hits)
                            tp[:L] = cum
                            tp[L:] = cum[-1]
                        shown = np.minimum(np.arange(1, n_max + 1), L)
                        fp_vec = shown - tp
                        fn_vec = total_pos - tp
                        tn_vec = (n_unknown - total_pos) - fp_vec
                        cell = counts[(a, k)]
                        cell[0] += tp
                        cell[1] += fp_vec
                        cell[2] += fn_vec
                        cell[3] += tn_vec
            for key, (tp, fp_vec, fn_vec, tn_vec) in counts.items():
                prec = np.zeros(n_max)
                rec_ = np.zeros(n_max)
                p_den = tp + fp_vec
                r_den = tp + fn_vec
                ok_p = p_den > 0
                ok_r = r_den > 0
                prec[ok_p] = tp[ok_p] / p_den[ok_p]
                rec_[ok_r] = tp[ok_r] / r_den[ok_r]
                if not (ok_p.all() and ok_r.all()):
                    per_seed_degenerate[key] += 1
                seed_fold_metrics[key].append((prec, rec_))
        if completed_folds == 0:
            raise TrainingDataError(
                f"seed {s}: every fold left at least one cluster unrepresented in training"
            )
        for key, folds_metrics in seed_fold_metrics.items():
            prec = np.mean([m[0] for m in folds_metrics], axis=0)
            rec_ = np.mean([m[1] for m in folds_metrics], axis=0)
            per_seed_curves[key].append((prec, rec_))
            a, k = key
            per_fold_records.append(
                {
                    "seed": s,
                    "alpha": a,
                    "k": k,
                    "precision": [float(v) for v in prec],
                    "recall": [float(v) for v in rec_],
                }
            )

    artifacts = []
    aggregate: dict = {"curves": {}}
    for (a, k), curves in per_seed_curves.items():
        prec = np.mean([c[0] for c in curves], axis=0)
        rec_ = np.mean([c[1] for c in curves], axis=0)
        curve = PrCurve(
            points=[(float(r), float(p)) for p, r in zip(prec, rec_)],
            alpha=a,
            k=k,
            n_skipped=per_seed_degenerate[(a, k)],
        )
        artifacts.append(write_pr_csv(curve, out_dir).name)
        aggregate["curves"][f"alpha={a:g},k={k}"] = {
            "precision": [float(v) for v in prec],
            "recall": [float(v) for v in rec_],
            "degenerate_fold_cells": per_seed_degenerate[(a, k)],
        }
    aggregate["n_skipped"] = n_skipped
    aggregate["n_skipped_folds"] = n_skipped_folds
    aggregate["published_reference"] = PUBLISHED_REFERENCE["recommendation_sweep"]

    return ExperimentReport(
        experiment_id="recommendation_sweep",
        config={
            "alpha_set": [float(a) for a in alpha_set],
            "k_set": [int(k) for k in k_set],
            "n_max": n_max,
            "n_folds": n_folds,
            "train": dataclasses.asdict(cfg),
            "weighting": weighting,
            "kappa": int(kappa),
        },
        per_fold=per_fold_records,
        aggregate=aggregate,
        seeds=[int(s) for s in seeds],
        artifacts=artifacts,
        warnings=warnings,
    )
