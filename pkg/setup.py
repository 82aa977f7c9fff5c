"""Build script: compiles the optional integer fast-path kernels.

The package works without the extension; `fairdiv._backend` falls back to
the pure-Python kernels when the compiled module is missing or when
FAIRDIV_PURE=1 is set in the environment.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fairdiv._kernels",
                ["src/fairdiv/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
