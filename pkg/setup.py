"""Build script for the optional compiled core.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes the Monte Carlo hot loops
several times faster.  Cython is therefore probed, not required.
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
                "gpplab._native",
                ["src/gpplab/_native.pyx"],
                libraries=["m"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
