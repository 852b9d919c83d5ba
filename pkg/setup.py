import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("HAWKDOVE_NO_EXT", "") in ("", "0"):
    ext_modules = cythonize(
        [Extension("hawkdove._kernels", ["src/hawkdove/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
