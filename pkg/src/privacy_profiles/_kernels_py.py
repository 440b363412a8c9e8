"""Pure-numpy kernels: the fallback used when the compiled extension is
unavailable.  Must stay semantically identical to ``_kernels_cy``."""

import numpy as np


def pairwise_cosine(x: np.ndarray) -> np.ndarray:
    """Symmetric cosine-similarity matrix over the rows of x.

    Zero rows get similarity 0 against everything, themselves included.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    norms = np.sqrt((x * x).sum(axis=1))
    denom = np.outer(norms, norms)
    sims = np.zeros((x.shape[0], x.shape[0]))
    nonzero = denom > 0.0
    dots = x @ x.T
    np.divide(dots, denom, out=sims, where=nonzero)
    np.clip(sims, -1.0, 1.0, out=sims)
    # Exact diagonal for non-zero rows; rounding would otherwise leave 1-eps.
    idx = np.flatnonzero(norms > 0.0)
    sims[idx, idx] = 1.0
    return sims


def kmedoids_run(
    distances: np.ndarray, init_medoids: np.ndarray, max_iter: int
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """One k-medoids run: alternate nearest-medoid assignment and the
    min-average-distance medoid update until assignments are stable.

    Ties: assignment goes to the lowest cluster index (medoids always to
    their own cluster), the medoid update picks the lowest user index.
    Returns (assignment, medoids, n_iter, converged).
    """
    d = np.asarray(distances, dtype=np.float64)
    medoids = np.array(init_medoids, dtype=np.int64)
    n = d.shape[0]
    assignment = _assign(d, medoids)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new_medoids = medoids.copy()
        for c in range(len(medoids)):
            members = np.flatnonzero(assignment == c)
            # Mean distance to co-members; argmin takes the lowest user index.
            costs = d[np.ix_(members, members)].sum(axis=1)
            new_medoids[c] = members[int(np.argmin(costs))]
        new_assignment = _assign(d, new_medoids)
        medoids = new_medoids
        if np.array_equal(new_assignment, assignment):
            assignment = new_assignment
            converged = True
            break
        assignment = new_assignment
    return assignment, medoids, it, converged


def _assign(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    # argmin returns the first (lowest cluster index) minimum.
    assignment = np.argmin(d[:, medoids], axis=1).astype(np.int64)
    assignment[medoids] = np.arange(len(medoids))
    return assignment


def silhouette_samples(
    distances: np.ndarray, assignment: np.ndarray, kappa: int
) -> np.ndarray:
    """Per-user silhouette (b-a)/max(a,b); 0 for singleton clusters and for
    users with a == b == 0."""
    d = np.asarray(distances, dtype=np.float64)
    assignment = np.asarray(assignment, dtype=np.int64)
    n = d.shape[0]
    sums = np.zeros((n, kappa))
    counts = np.zeros(kappa, dtype=np.int64)
    for c in range(kappa):
        mask = assignment == c
        counts[c] = mask.sum()
        sums[:, c] = d[:, mask].sum(axis=1)

    s = np.zeros(n)
    for u in range(n):
        c = assignment[u]
        if counts[c] <= 1:
            continue
        a = sums[u, c] / (counts[c] - 1)
        b = np.inf
        for other in range(kappa):
            if other == c or counts[other] == 0:
                continue
            b = min(b, sums[u, other] / counts[other])
        denom = max(a, b)
        if denom > 0.0 and np.isfinite(b):
            s[u] = (b - a) / denom
    return s
