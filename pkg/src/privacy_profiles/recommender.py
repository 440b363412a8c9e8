"""User-based collaborative filtering over one cluster's deny/allow matrix.

A target user is a partial row (NaN marks an unknown setting).  Neighbor
similarity is the cosine of the rows restricted to the target's known
columns; predictions are the target's mean plus the similarity-weighted,
mean-adjusted neighbor values.  All means are taken over the target's known
columns so that a target identical to a neighbor reproduces that neighbor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .clustering import Clustering
from .corpus import Dataset
from .errors import ParameterError

logger = logging.getLogger(__name__)

UNKNOWN = np.nan


@dataclass
class RatingsMatrix:
    values: np.ndarray  # (n_users, n_settings), cells 0 / 1 / NaN
    user_ids: list[str]
    aliases: list[str]


@dataclass
class Recommendation:
    alias: str
    score: float
    value: int  # suggested 0/1 (score thresholded at 0.5)
    fallback: bool  # True when no neighbor carried evidence


@dataclass
class RecommendationList:
    entries: list[Recommendation]
    n_cutoff: int


def build_cluster_matrix(dataset: Dataset, clustering: Clustering, cluster_id: int) -> RatingsMatrix:
    """Ratings matrix restricted to one cluster's members, columns unchanged."""
    members = np.flatnonzero(clustering.assignment == cluster_id)
    if len(members) == 0:
        raise ParameterError(f"cluster {cluster_id} is empty")
    matrix = dataset.matrix()[members]
    ids = [dataset.users[i].user_id for i in members]
    return RatingsMatrix(matrix, ids, dataset.catalog.aliases)


def _idf_weights(values: np.ndarray) -> np.ndarray:
    filled = np.nan_to_num(values, nan=0.0)
    active = (filled > 0).sum(axis=0).astype(np.float64)
    idf = np.zeros(values.shape[1])
    nz = active > 0
    idf[nz] = np.log(values.shape[0] / active[nz])
    return idf


def top_similar_users(
    matrix: RatingsMatrix,
    target_row: np.ndarray,
    k: int,
    exclude_index: int | None = None,
    weighting: str = "raw",
) -> list[tuple[int, float]]:
    """Top-k most similar rows, by cosine over the target's known columns.

    Ties break toward the lower user index.  Unknown cells in candidate rows
    count as 0.  ``weighting="tfidf"`` applies idf column weights (computed
    from this matrix) before the cosine; the default compares raw 0/1 rows.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    if weighting not in ("raw", "tfidf"):
        raise ParameterError(f"unknown weighting {weighting!r}")
    target = np.asarray(target_row, dtype=np.float64)
    known = ~np.isnan(target)
    if not known.any():
        logger.warning("all-unknown target row: no similarity evidence")
        return []

    rows = np.nan_to_num(matrix.values[:, known], nan=0.0)
    t = target[known]
    if weighting == "tfidf":
        idf = _idf_weights(matrix.values)[known]
        rows = rows * idf
        t = t * idf
    t_norm = np.sqrt(t @ t)
    row_norms = np.sqrt((rows * rows).sum(axis=1))
    sims = np.zeros(len(rows))
    ok = (row_norms > 0) & (t_norm > 0)
    sims[ok] = np.clip((rows[ok] @ t) / (row_norms[ok] * t_norm), -1.0, 1.0)

    candidates = [i for i in range(len(rows)) if i != exclude_index]
    candidates.sort(key=lambda i: (-sims[i], i))
    return [(i, float(sims[i])) for i in candidates[:k]]


def predict_rating(
    matrix: RatingsMatrix,
    target_row: np.ndarray,
    setting: int,
    neighbors: list[tuple[int, float]],
) -> tuple[float, bool]:
    """Predicted inclusion score for one unknown setting.

    Returns (score, fallback); fallback is True when no neighbor knows the
    setting or the similarity mass is zero, in which case the score is the
    target's own mean.
    """
    target = np.asarray(target_row, dtype=np.float64)
    known = ~np.isnan(target)
    if not known.any():
        raise ParameterError("target has no known settings")
    if not np.isnan(target[setting]):
        raise ParameterError(f"setting {setting} is already known")
    r_u = float(target[known].mean())

    num = 0.0
    den = 0.0
    contributed = False
    for v, sim in neighbors:
        row = matrix.values[v]
        if np.isnan(row[setting]):
            continue
        basis = known & ~np.isnan(row)
        if not basis.any():
            continue
        r_v = float(row[basis].mean())
        num += (float(row[setting]) - r_v) * sim
        den += sim
        contributed = True
    if not contributed or den == 0.0:
        return r_u, True
    return r_u + num / den, False


def _score_unknowns(
    matrix: RatingsMatrix,
    target: np.ndarray,
    neighbors: list[tuple[int, float]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized predict_rating over every unknown setting at once.

    Returns (unknown_indices, scores, fallback_flags).  Matches the scalar
    predict_rating up to float summation order.
    """
    known = ~np.isnan(target)
    unknown = np.flatnonzero(~known)
    r_u = float(target[known].mean())
    if not neighbors:
        return unknown, np.full(len(unknown), r_u), np.ones(len(unknown), dtype=bool)

    idx = [v for v, _ in neighbors]
    sims = np.array([s for _, s in neighbors])
    rows = matrix.values[idx]
    row_known = ~np.isnan(rows)
    basis = row_known & known  # per neighbor, columns shared with the target
    basis_count = basis.sum(axis=1)
    filled = np.nan_to_num(rows, nan=0.0)
    r_v = np.zeros(len(idx))
    has_basis = basis_count > 0
    r_v[has_basis] = (filled * basis)[has_basis].sum(axis=1) / basis_count[has_basis]

    contrib = row_known[:, unknown] & has_basis[:, None]
    num = ((filled[:, unknown] - r_v[:, None]) * sims[:, None] * contrib).sum(axis=0)
    den = (sims[:, None] * contrib).sum(axis=0)
    fallback = ~contrib.any(axis=0) | (den == 0.0)
    scores = np.full(len(unknown), r_u)
    ok = ~fallback
    scores[ok] = r_u + num[ok] / den[ok]
    return unknown, scores, fallback


def recommend_top_n(
    matrix: RatingsMatrix,
    target_row: np.ndarray,
    k: int,
    n: int,
    exclude_index: int | None = None,
    weighting: str = "raw",
) -> RecommendationList:
    """Rank every unknown setting by predicted score, descending (ties by
    alias), and keep the first n.  Suggested value is 1 when score >= 0.5."""
    target = np.asarray(target_row, dtype=np.float64)
    if not (~np.isnan(target)).any():
        raise ParameterError("target must have at least one known setting")
    if n < 0:
        raise ParameterError("n must be >= 0")
    neighbors = top_similar_users(matrix, target, k, exclude_index, weighting)
    unknown, scores, fallback = _score_unknowns(matrix, target, neighbors)
    entries = [
        Recommendation(
            alias=matrix.aliases[setting],
            score=float(score),
            value=1 if score >= 0.5 else 0,
            fallback=bool(flag),
        )
        for setting, score, flag in zip(unknown, scores, fallback)
    ]
    entries.sort(key=lambda e: (-e.score, e.alias))
    return RecommendationList(entries[:n], n_cutoff=n)


def partial_row(width: int, known: dict[int, float]) -> np.ndarray:
    """NaN-filled row with the given known column values."""
    row = np.full(width, UNKNOWN)
    for idx, value in known.items():
        row[idx] = value
    return row
