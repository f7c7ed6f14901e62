import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext_modules = [
    Extension(
        "hetnet._core",
        sources=["src/hetnet/_core.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: the compiled and pure-Python paths must round identically
        extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
