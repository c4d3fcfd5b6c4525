"""Build the optional Cython kernels.

The package runs without them: ``carxefe._backend`` falls back to the
pure-Python implementations when the extension cannot be imported.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "carxefe._kernels",
                ["src/carxefe/_kernels.pyx"],
                # contraction into FMA would break bitwise parity with the fallback
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
