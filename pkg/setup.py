"""Build script: compiles the optional search speedup extension.

The package works without the extension (a pure-Python fallback is
selected at import time); set BELIEFGAMES_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise install pure-Python only."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: speedup extension not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python")


ext_modules = []
if not os.environ.get("BELIEFGAMES_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "beliefgames.search._speedups",
                    ["src/beliefgames/search/_speedups.pyx"],
                    # -ffp-contract=off keeps float results bit-identical to
                    # the pure-Python reference (no fused multiply-adds).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        print("warning: Cython not available; using pure Python")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
