from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("simbridge._kernels", ["src/simbridge/_kernels.pyx"])],
        language_level=3,
    )
except ImportError:
    # No Cython: install pure-Python only, the fallback kernel is used.
    ext_modules = []

setup(ext_modules=ext_modules)
