"""Build script: compiles the chain-stepping kernel when Cython is available.

The package is fully functional without the extension; the pure-Python
kernel in qmemsim._kernels.chain_py is selected at import time as a
fallback.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qmemsim._kernels.chain_cy",
                ["src/qmemsim/_kernels/chain_cy.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - degraded build still works
    warnings.warn(f"compiled kernel skipped ({exc}); using pure-Python fallback")

setup(ext_modules=ext_modules)
