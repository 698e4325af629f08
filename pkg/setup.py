import os

from setuptools import Extension, setup

# The compiled core is optional: without a C toolchain the package falls back
# to the pure numpy kernels selected at import time (see locsk/backend.py).
ext_modules = []
if os.environ.get("LOCSK_NO_EXT", "0") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "locsk._corex",
                    ["src/locsk/_corex.pyx"],
                    # -ffp-contract=off keeps per-element arithmetic identical
                    # to the numpy fallback (no FMA fusion), which the
                    # cross-backend bit-identity tests rely on.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
