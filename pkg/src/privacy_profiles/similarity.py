"""Feature weighting and user-user similarity.

Each user is weighted per setting as value * ln(n_users / n_users_with_it);
similarity between users is the cosine of their weight vectors over the full
dimension, with all-zero vectors similar to nothing (similarity 0).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .corpus import Dataset
from .errors import ParameterError


@dataclass
class SimilarityMatrix:
    values: np.ndarray  # symmetric (n, n), entries in [0, 1]
    user_order: list[str]


def tfidf_weights(dataset: Dataset) -> np.ndarray:
    """Per-user tf-idf weight matrix, shape (n_users, width).

    Natural log.  Columns set by nobody or by everybody get weight 0.
    """
    if dataset.n_users == 0:
        raise ParameterError("cannot weight an empty dataset")
    m = dataset.matrix()
    active = (m > 0).sum(axis=0).astype(np.float64)
    idf = np.zeros(m.shape[1])
    nonzero = active > 0
    idf[nonzero] = np.log(dataset.n_users / active[nonzero])
    return m * idf


def cosine(phi: np.ndarray, omega: np.ndarray) -> float:
    """Cosine similarity of two vectors; 0 if either is all-zero."""
    phi = np.asarray(phi, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    if phi.shape != omega.shape:
        raise ParameterError(f"dimension mismatch: {phi.shape} vs {omega.shape}")
    np_, no = np.sqrt(phi @ phi), np.sqrt(omega @ omega)
    if np_ == 0.0 or no == 0.0:
        return 0.0
    return float(np.clip((phi @ omega) / (np_ * no), -1.0, 1.0))


def similarity_matrix(vectors: np.ndarray, user_ids: list[str]) -> SimilarityMatrix:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] != len(user_ids):
        raise ParameterError("vectors must be (n_users, width) matching user_ids")
    return SimilarityMatrix(backend.pairwise_cosine(vectors), list(user_ids))


def distance_matrix(sims: SimilarityMatrix | np.ndarray) -> np.ndarray:
    """d = 1 - sim entrywise, with the diagonal forced to 0.

    The diagonal override matters for all-zero vectors, whose self-similarity
    is 0 by convention but whose self-distance must still be 0.
    """
    values = sims.values if isinstance(sims, SimilarityMatrix) else np.asarray(sims)
    d = 1.0 - values
    np.fill_diagonal(d, 0.0)
    return d


def write_matrix_csv(values: np.ndarray, user_ids: list[str], path: str | Path) -> None:
    """Debug export: square matrix with user_ids as header and row labels."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id"] + list(user_ids))
        for uid, row in zip(user_ids, values):
            writer.writerow([uid] + [repr(float(v)) for v in row])
