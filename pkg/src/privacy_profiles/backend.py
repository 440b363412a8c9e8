"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
pure-numpy fallback is used.  ``PRIVPROF_BACKEND=py`` forces the fallback
(useful for the benchmark and for testing both paths).
"""

import os

from . import _kernels_py

_forced = os.environ.get("PRIVPROF_BACKEND", "").lower()

if _forced == "py":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _forced == "cy":
            raise
        _impl = _kernels_py
        BACKEND = "python"

pairwise_cosine = _impl.pairwise_cosine
kmedoids_run = _impl.kmedoids_run
silhouette_samples = _impl.silhouette_samples
