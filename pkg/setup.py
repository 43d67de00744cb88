"""Builds the compiled integration kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a missing Cython is tolerated rather than fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "epifit._kernels",
                ["src/epifit/_kernels.pyx"],
                # -ffp-contract=off keeps the compiled kernel bit-compatible
                # with the pure-Python fallback (no FMA fusion).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
