import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup: if Cython or a C compiler is
# unavailable the install still succeeds and the package falls back to the
# numpy implementation at import time (see asgld.backend).
ext_modules = []
if os.environ.get("ASGLD_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "asgld._kernels",
                    ["src/asgld/_kernels.pyx"],
                    # -ffp-contract=off: no FMA contraction, so the compiled
                    # kernels are bit-for-bit identical to the numpy fallback.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
