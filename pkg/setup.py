import numpy
from setuptools import setup

# The compiled kernels are optional: if the toolchain is unavailable the
# package falls back to the pure-NumPy implementations at import time.
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "hdmdc._kernels._core",
                ["src/hdmdc/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
