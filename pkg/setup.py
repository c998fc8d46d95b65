"""Builds the optional compiled kernel for the boosted-tree trainer.

The extension is a pure speedup: if Cython or a C compiler is missing the
package installs anyway and falls back to the numpy kernels at import time
(see pararank.ltr.kernels). Set PARARANK_NO_EXT=1 to skip the build.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python install when the extension cannot build."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, broken toolchain, ...
            print(f"warning: skipping compiled kernels ({exc!r}); "
                  "pararank will use the pure-numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc!r}); "
                  "pararank will use the pure-numpy fallback")


def extensions():
    if os.environ.get("PARARANK_NO_EXT") == "1":
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "pararank.ltr._kernels_cy",
        sources=["src/pararank/ltr/_kernels_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
