"""Build script: compiles the strategy-scan kernel when Cython is available.

The package works without the extension (a numpy fallback is selected at
import time), so a failed build is downgraded to a warning rather than an
error.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "bellforge._scan",
                ["src/bellforge/_scan.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("warning: Cython not found, building without the compiled scan kernel", file=sys.stderr)

setup(ext_modules=ext_modules)
