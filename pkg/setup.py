"""Build script: compiles the optional traversal kernel extension.

The package works without the extension (a pure-Python fallback is
selected at import time), so a failed compile only costs speed.
Set CASEPATH_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building the casepath kernel extension failed ({exc}); "
            "falling back to the pure-Python kernels",
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if not os.environ.get("CASEPATH_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "casepath._kernels",
                    ["src/casepath/_kernels.pyx"],
                    language="c++",
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
        cmdclass = {"build_ext": OptionalBuildExt}
    except ImportError:
        print("warning: Cython not available; skipping kernel extension", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass=cmdclass)
