from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rssbreath.kernels._speedups",
                ["src/rssbreath/kernels/_speedups.pyx"],
                extra_compile_args=["-O3", "-ffast-math"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
