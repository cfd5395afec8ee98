"""Build script: compiles the optional Cython reconstruction kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here is downgraded to a warning.
"""

import sys

import numpy as np
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython extension if possible, otherwise keep going."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: extension build failed ({exc}); "
                  "falling back to pure-NumPy kernels", file=sys.stderr)

    def build_extensions(self):
        try:
            super().build_extensions()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: extension build failed ({exc}); "
                  "falling back to pure-NumPy kernels", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not found; building without compiled kernels",
              file=sys.stderr)
        return []
    from setuptools import Extension

    ext = Extension(
        "ttweno.kernels._weno_cy",
        ["src/ttweno/kernels/_weno_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False,
                             "cdivision": True},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
