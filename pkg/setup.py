"""Build script: optionally compiles the hot kernel modules with Cython.

The modules under ``src/sigaware/_core`` are plain Python and fully
functional when interpreted.  When Cython and a C compiler are available
they are additionally compiled to extension modules (same source, same
semantics), which the backend loader prefers at import time.  Any build
failure degrades to the pure-Python package instead of failing the
install.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext

KERNEL_SOURCES = [
    "src/sigaware/_core/lang_impl.py",
    "src/sigaware/_core/interval_impl.py",
    "src/sigaware/_core/feats_impl.py",
]


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"kernel compilation skipped ({exc}); using pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); using pure-Python backend")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        KERNEL_SOURCES,
        compiler_directives={"language_level": "3"},
        quiet=True,
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
