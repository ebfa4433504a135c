import os

from setuptools import Extension, setup

# The compiled kernels are an accelerator, not a requirement: the package
# falls back to the pure NumPy implementation when the extension is absent.
# Set SZMD_SKIP_EXT=1 to skip building it.
ext_modules = []
if os.environ.get("SZMD_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "szmd._kernels",
                    ["src/szmd/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
