"""Build script for the optional compiled curve kernel.

The package is pure Python except for mixroute._kernel._fast, a Cython
extension implementing the secp256k1 field and point arithmetic that
dominates simulator runtime. The extension is marked optional: if the
build fails (no compiler, no Cython), installation still succeeds and
the package falls back to the pure-Python kernel at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mixroute._kernel._fast",
                ["src/mixroute/_kernel/_fast.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
