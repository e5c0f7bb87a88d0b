"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here should not block installation.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/jamsense/kernels/_ckernels.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    include_dirs = [np.get_include()]
except ImportError:
    include_dirs = []

setup(
    ext_modules=ext_modules,
    include_dirs=include_dirs,
)
