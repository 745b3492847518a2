"""Build script for the optional compiled time-stepping kernel.

The package works without the extension: stochwave._kernels falls back to a
vectorized NumPy implementation at import time.  -ffp-contract=off keeps the
C arithmetic bit-identical to the NumPy fallback (no FMA contraction).
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "stochwave._stepper",
                ["src/stochwave/_stepper.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
