"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure here is downgraded to a
warning instead of aborting the install.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/poisson_groupoids/_kernels.pyx",
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - environment dependent
    warnings.warn(f"Cython kernels not built, using numpy fallback: {exc}")

setup(ext_modules=ext_modules)
