"""Build script: compiles the optional GF(2) kernel extension.

The extension is a pure speedup; if Cython or a C compiler is missing the
install still succeeds and the package falls back to the pure-Python
kernels at import time.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to a warning instead of failing the install."""

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
            f"warning: building the compiled kernels failed ({exc}); "
            "qtoeplitz will use the pure-Python kernels",
            file=sys.stderr,
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython not available; skipping compiled kernels",
            file=sys.stderr,
        )
        return []
    from setuptools import Extension

    ext = Extension(
        "qtoeplitz._kernels",
        ["src/qtoeplitz/_kernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
