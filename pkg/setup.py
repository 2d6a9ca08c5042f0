#!/usr/bin/env python3
"""Build script: compiles the hot-kernel extension when Cython is available.

The package works without the extension (a NumPy/Python fallback is
selected at import time), so a missing compiler or Cython only costs
speed, never functionality.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/hbdiag/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
