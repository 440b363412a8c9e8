# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Semantics mirror ``_kernels_py`` exactly; the backend
module picks whichever of the two imports."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()


def pairwise_cosine(object x_in):
    """Symmetric cosine-similarity matrix over the rows of x.

    Zero rows get similarity 0 against everything, themselves included.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] norms = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, n))
    cdef Py_ssize_t i, j, t
    cdef double acc, v
    for i in range(n):
        acc = 0.0
        for t in range(m):
            acc += x[i, t] * x[i, t]
        norms[i] = sqrt(acc)
    for i in range(n):
        if norms[i] == 0.0:
            continue
        out[i, i] = 1.0
        for j in range(i + 1, n):
            if norms[j] == 0.0:
                continue
            acc = 0.0
            for t in range(m):
                acc += x[i, t] * x[j, t]
            v = acc / (norms[i] * norms[j])
            if v > 1.0:
                v = 1.0
            elif v < -1.0:
                v = -1.0
            out[i, j] = v
            out[j, i] = v
    return out


cdef void _assign_c(
    cnp.ndarray[cnp.float64_t, ndim=2] d,
    cnp.ndarray[cnp.int64_t, ndim=1] medoids,
    cnp.ndarray[cnp.int64_t, ndim=1] out,
):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t kappa = medoids.shape[0]
    cdef Py_ssize_t u, c
    cdef double best, val
    for u in range(n):
        best = INFINITY
        out[u] = 0
        for c in range(kappa):
            val = d[u, medoids[c]]
            if val < best:
                best = val
                out[u] = c
    # medoids always land in their own cluster
    for c in range(kappa):
        out[medoids[c]] = c


def kmedoids_run(object distances, object init_medoids, int max_iter):
    """One k-medoids run: alternate nearest-medoid assignment and the
    min-average-distance medoid update until assignments are stable.

    Ties: assignment goes to the lowest cluster index (medoids always to
    their own cluster), the medoid update picks the lowest user index.
    Returns (assignment, medoids, n_iter, converged).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(distances, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] medoids = np.array(init_medoids, dtype=np.int64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t kappa = medoids.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] assignment = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] new_assignment = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] new_medoids = medoids.copy()
    cdef int it = 0
    cdef bint converged = False
    cdef bint same
    cdef Py_ssize_t u, v, c, best_u
    cdef double cost, best_cost

    _assign_c(d, medoids, assignment)
    for it in range(1, max_iter + 1):
        for c in range(kappa):
            best_cost = INFINITY
            best_u = 0
            for u in range(n):
                if assignment[u] != c:
                    continue
                cost = 0.0
                for v in range(n):
                    if assignment[v] == c:
                        cost += d[u, v]
                if cost < best_cost:
                    best_cost = cost
                    best_u = u
            new_medoids[c] = best_u
        _assign_c(d, new_medoids, new_assignment)
        medoids[:] = new_medoids
        same = True
        for u in range(n):
            if new_assignment[u] != assignment[u]:
                same = False
                break
        if same:
            converged = True
            break
        assignment[:] = new_assignment
    return assignment, medoids, it, converged


def silhouette_samples(object distances, object assignment_in, int kappa):
    """Per-user silhouette (b-a)/max(a,b); 0 for singleton clusters and for
    users with a == b == 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(distances, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] assignment = np.asarray(assignment_in, dtype=np.int64)
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sums = np.zeros((n, kappa))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(kappa, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.zeros(n)
    cdef Py_ssize_t u, v, c, other
    cdef double a, b, denom, q
    for v in range(n):
        counts[assignment[v]] += 1
    for u in range(n):
        for v in range(n):
            sums[u, assignment[v]] += d[u, v]
    for u in range(n):
        c = assignment[u]
        if counts[c] <= 1:
            continue
        a = sums[u, c] / (counts[c] - 1)
        b = INFINITY
        for other in range(kappa):
            if other == c or counts[other] == 0:
                continue
            q = sums[u, other] / counts[other]
            if q < b:
                b = q
        denom = a if a > b else b
        if denom > 0.0 and b != INFINITY:
            s[u] = (b - a) / denom
    return s
