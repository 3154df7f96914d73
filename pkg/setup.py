from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the numpy kernel
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("mgbar._kernels", ["src/mgbar/_kernels.pyx"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
