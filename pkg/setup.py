"""Build script for the optional compiled kernels.

The package works without the extension (a pure-numpy fallback is selected at
import time), so a failed compile must not break installation.
"""

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/privacy_profiles/_kernels_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
