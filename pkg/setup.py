"""Build script.

The determinant-path soliton kernel has a compiled core
(src/chiralfield/kernels/_native.pyx).  The build is optional: if
Cython or a C compiler is unavailable the package installs anyway and
falls back to the vectorized numpy kernel at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "chiralfield.kernels._native",
                ["src/chiralfield/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
