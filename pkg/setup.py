"""Build the optional compiled kernels.

If Cython or a C compiler is missing the package still installs; the
numpy fallback in ``srdcnn._fallback`` is then selected at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SRDCNN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "srdcnn._kernels",
                    ["src/srdcnn/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
