"""Build glue for the optional compiled kernel.

The package is pure Python; toposforge._kernels._fast is a drop-in
accelerator for the permutation kernels.  If Cython (or a C compiler)
is unavailable the build silently falls back to the pure backend.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "toposforge._kernels._fast",
                ["src/toposforge/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
