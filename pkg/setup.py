"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing or failing Cython toolchain must not break
installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("cyclebench.backend._core", ["src/cyclebench/backend/_core.pyx"])],
        language_level="3",
    )

# to build in place: python setup.py build_ext --inplace
setup(ext_modules=ext_modules)
