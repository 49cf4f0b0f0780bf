"""Build script: compiles the optional pairwise-interaction kernel.

The compiled extension is a pure speed-up; hgic.kernels falls back to the
Python implementation when the build is unavailable.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    # -ffp-contract=off keeps the C arithmetic bit-identical to the Python
    # fallback (no FMA contraction); the kernel parity tests rely on it.
    ext_modules = cythonize(
        [
            Extension(
                "hgic.kernels._ckernels",
                ["src/hgic/kernels/_ckernels.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
