"""Build script: compiles the optional Cython kernel for the alternating
minimization inner loop.  The package is fully functional without it (a pure
numpy fallback is selected at import), so any build failure here downgrades
to a source-only install instead of aborting.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("HBFSIM_SKIP_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "hbfsim.precoding._altmin_cy",
            ["src/hbfsim/precoding/_altmin_cy.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        sys.stderr.write(
            "hbfsim: skipping compiled kernel (%s); pure-python fallback will be used\n" % exc
        )
        ext_modules = []

setup(ext_modules=ext_modules)
