"""Build script: compiles the optional simulation kernel.

The package is fully functional without the extension (a pure-Python core is
selected at import time), so a failing C toolchain must not fail the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if we can; fall back to pure Python if we can't."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled simulation core failed (%s); "
            "installing with the pure-Python core only." % exc,
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("WARNING: Cython unavailable; skipping compiled core.", file=sys.stderr)
        return []
    ext = Extension(
        "systolicfir._simcore",
        sources=["src/systolicfir/_simcore.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
