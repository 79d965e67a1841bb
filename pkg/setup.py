import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "focusfocus.integrate._kernel",
    ["src/focusfocus/integrate/_kernel.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
