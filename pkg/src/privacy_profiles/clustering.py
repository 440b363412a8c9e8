"""K-medoids clustering plus the quality metrics used by the subset study."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .errors import InstanceTooLargeError, ParameterError

BRUTE_FORCE_GUARD = 10**6
DEFAULT_RESTARTS = 20
# Below this many possible medoid subsets, restarts enumerate them all.
EXHAUSTIVE_INIT_BOUND = 64


@dataclass
class Clustering:
    kappa: int
    medoid_ids: list[int]
    assignment: np.ndarray
    total_cost: float
    seed: int
    n_iter: int = 0
    converged: bool = True


def _check_distances(distances: np.ndarray) -> np.ndarray:
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ParameterError("distance matrix must be square")
    if not np.allclose(d, d.T, atol=1e-12):
        raise ParameterError("distance matrix must be symmetric")
    if not np.allclose(np.diag(d), 0.0, atol=1e-12):
        raise ParameterError("distance matrix must have a zero diagonal")
    return d


def _cost(d: np.ndarray, medoids: np.ndarray) -> float:
    # Canonical cost so k-medoids and the brute-force oracle sum identically.
    return float(d[:, medoids].min(axis=1).sum())


def _nearest_assignment(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    assignment = np.argmin(d[:, medoids], axis=1).astype(np.int64)
    assignment[medoids] = np.arange(len(medoids))
    return assignment


def _swap_refine(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    """Greedy swap pass: replace one medoid with one non-medoid while it helps.

    First-improvement scan in (medoid slot, candidate index) order; accepts a
    swap only on a strict cost decrease, so the loop terminates.  Returns the
    sorted swap-optimal medoid set.
    """
    medoids = np.sort(np.asarray(medoids, dtype=np.int64))
    best_cost = _cost(d, medoids)
    n = d.shape[0]
    improved = True
    while improved:
        improved = False
        current = set(medoids.tolist())
        for slot in range(len(medoids)):
            for candidate in range(n):
                if candidate in current:
                    continue
                trial = medoids.copy()
                trial[slot] = candidate
                trial_cost = _cost(d, trial)
                if trial_cost < best_cost:
                    best_cost = trial_cost
                    medoids = np.sort(trial)
                    improved = True
                    break
            if improved:
                break
    return medoids


def _restart_inits(
    n: int, kappa: int, seed: int, restarts: int
) -> list[np.ndarray]:
    """Initial medoid sets, one per restart, all distinct.

    On small instances (at most ``max(restarts, EXHAUSTIVE_INIT_BOUND)``
    possible subsets) the subsets are enumerated exhaustively in index order,
    which makes the best-of-restarts cost match exhaustive search; otherwise
    each restart draws uniformly without replacement from its own seeded
    stream, redrawing on collision with an earlier restart.
    """
    if math.comb(n, kappa) <= max(restarts, EXHAUSTIVE_INIT_BOUND):
        return [
            np.asarray(combo, dtype=np.int64)
            for combo in itertools.combinations(range(n), kappa)
        ]
    inits: list[np.ndarray] = []
    seen: set[tuple[int, ...]] = set()
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        init = np.sort(rng.choice(n, size=kappa, replace=False)).astype(np.int64)
        while tuple(init) in seen:
            init = np.sort(rng.choice(n, size=kappa, replace=False)).astype(np.int64)
        seen.add(tuple(init))
        inits.append(init)
    return inits


def kmedoids(
    distances: np.ndarray,
    kappa: int,
    seed: int = 0,
    max_iter: int = 100,
    restarts: int = DEFAULT_RESTARTS,
) -> Clustering:
    """Best of ``restarts`` seeded k-medoids runs (seeds seed+0..restarts-1).

    Each run starts from a distinct medoid subset (enumerated exhaustively
    when all subsets fit within the restart budget, sampled uniformly without
    replacement otherwise), alternates nearest-medoid assignment with the
    minimum-total-distance medoid update, then applies a greedy swap pass that
    replaces single medoids while any replacement strictly lowers the cost.
    Cost never increases within a run.  Ties across restarts go to the lowest
    restart index.
    """
    d = _check_distances(distances)
    n = d.shape[0]
    if not 1 <= kappa <= n:
        raise ParameterError(f"kappa must be in [1, {n}], got {kappa}")
    if max_iter < 1 or restarts < 1:
        raise ParameterError("max_iter and restarts must be >= 1")

    best: Clustering | None = None
    for init in _restart_inits(n, kappa, seed, restarts):
        prev_cost = _cost(d, init)
        assignment, medoids, n_iter, converged = backend.kmedoids_run(d, init, max_iter)
        medoids = np.sort(np.asarray(medoids, dtype=np.int64))
        cost = _cost(d, medoids)
        if cost > prev_cost + 1e-9:
            raise AssertionError("k-medoids cost increased across a run")
        # Interleave swap refinement with re-alternation until neither phase
        # strictly improves the cost.
        while True:
            swapped = _swap_refine(d, medoids)
            if np.array_equal(swapped, medoids):
                break
            swap_cost = _cost(d, swapped)
            assignment, realt, extra_iter, converged = backend.kmedoids_run(
                d, swapped, max_iter
            )
            n_iter += extra_iter
            realt = np.sort(np.asarray(realt, dtype=np.int64))
            realt_cost = _cost(d, realt)
            if realt_cost < swap_cost:
                medoids, cost = realt, realt_cost
            else:
                medoids, cost = swapped, swap_cost
                break
        if prev_cost < cost:
            # Summation-order effects inside the alternation can perturb an
            # exact-arithmetic tie by an ulp; never report worse than the
            # starting subset's canonical cost.
            medoids, cost = np.sort(init), prev_cost
        assignment = _nearest_assignment(d, medoids)
        if best is None or cost < best.total_cost:
            best = Clustering(
                kappa=kappa,
                medoid_ids=[int(m) for m in medoids],
                assignment=np.asarray(assignment, dtype=np.int64),
                total_cost=cost,
                seed=seed,
                n_iter=int(n_iter),
                converged=bool(converged),
            )
    assert best is not None
    return best


def brute_force_kmedoids(distances: np.ndarray, kappa: int) -> Clustering:
    """Exhaustive testing oracle: the globally cost-minimal medoid set.

    Ties go to the lexicographically smallest medoid index set.  Guarded to
    C(n, kappa) <= 10^6 candidate sets.
    """
    d = _check_distances(distances)
    n = d.shape[0]
    if not 1 <= kappa <= n:
        raise ParameterError(f"kappa must be in [1, {n}], got {kappa}")
    if math.comb(n, kappa) > BRUTE_FORCE_GUARD:
        raise InstanceTooLargeError(f"C({n},{kappa}) exceeds {BRUTE_FORCE_GUARD}")

    best_cost = np.inf
    best_medoids: tuple[int, ...] | None = None
    for medoids in itertools.combinations(range(n), kappa):
        cost = _cost(d, np.asarray(medoids))
        if cost < best_cost:
            best_cost = cost
            best_medoids = medoids
    assert best_medoids is not None
    medoid_arr = np.asarray(best_medoids, dtype=np.int64)
    assignment = np.argmin(d[:, medoid_arr], axis=1).astype(np.int64)
    assignment[medoid_arr] = np.arange(kappa)
    return Clustering(
        kappa=kappa,
        medoid_ids=list(best_medoids),
        assignment=assignment,
        total_cost=_cost(d, medoid_arr),
        seed=-1,
    )


def compactness(clustering: Clustering, distances: np.ndarray) -> float:
    """Total member-to-medoid distance; lower is better."""
    d = np.asarray(distances, dtype=np.float64)
    medoids = np.asarray(clustering.medoid_ids, dtype=np.int64)
    return float(d[np.arange(d.shape[0]), medoids[clustering.assignment]].sum())


def silhouette(clustering: Clustering, distances: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-user silhouette values and their mean; requires kappa >= 2."""
    if clustering.kappa < 2:
        raise ParameterError("silhouette needs at least 2 clusters")
    d = _check_distances(distances)
    per_user = backend.silhouette_samples(d, clustering.assignment, clustering.kappa)
    return per_user, float(per_user.mean())


def label_agreement(labels_a: np.ndarray, labels_b: np.ndarray) -> float:
    """Best match rate between two labelings over all label permutations."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ParameterError("label arrays must have equal length")
    values = np.unique(b)
    pool = np.unique(np.concatenate([a, b]))
    if len(pool) > 8:
        raise ParameterError("permutation search is limited to 8 labels")
    best = 0.0
    for perm in itertools.permutations(pool, len(values)):
        mapping = dict(zip(values, perm))
        mapped = np.array([mapping[v] for v in b])
        best = max(best, float(np.mean(a == mapped)))
    return best


PROFILE_NAMES = ["Inattentive", "Attentive", "Solicitous"]


def profile_names(kappa: int) -> list[str]:
    """Display names for clusters ordered by descending allow rate.  The
    three-profile scheme has canonical names; other widths fall back to
    numbered profiles."""
    if kappa == len(PROFILE_NAMES):
        return list(PROFILE_NAMES)
    return [f"Profile {i}" for i in range(kappa)]


def relabel_by_allow_rate(clustering: Clustering, matrix: np.ndarray) -> Clustering:
    """Reindex clusters by descending mean answer value, so cluster 0 is the
    most permissive profile and cluster kappa-1 the most restrictive."""
    rates = []
    for c in range(clustering.kappa):
        members = clustering.assignment == c
        rates.append(matrix[members].mean() if members.any() else -1.0)
    order = np.argsort(np.argsort(-np.asarray(rates), kind="stable"), kind="stable")
    new_assignment = order[clustering.assignment]
    new_medoids = [0] * clustering.kappa
    for old, new in enumerate(order):
        new_medoids[new] = clustering.medoid_ids[old]
    return Clustering(
        kappa=clustering.kappa,
        medoid_ids=new_medoids,
        assignment=new_assignment.astype(np.int64),
        total_cost=clustering.total_cost,
        seed=clustering.seed,
        n_iter=clustering.n_iter,
        converged=clustering.converged,
    )


def write_clustering_csv(clustering: Clustering, user_ids: list[str], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "cluster"])
        for uid, c in zip(user_ids, clustering.assignment):
            writer.writerow([uid, int(c)])


def clustering_summary(clustering: Clustering, mean_silhouette: float | None = None) -> dict:
    summary = {
        "kappa": clustering.kappa,
        "medoid_ids": clustering.medoid_ids,
        "total_cost": clustering.total_cost,
        "seed": clustering.seed,
        "n_iter": clustering.n_iter,
        "converged": clustering.converged,
        "cluster_sizes": np.bincount(clustering.assignment, minlength=clustering.kappa).tolist(),
    }
    if mean_silhouette is not None:
        summary["mean_silhouette"] = mean_silhouette
    return summary


def write_clustering_json(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
