"""Build script for the compiled walk kernel.

The extension is optional: if Cython or a C compiler is missing, the install
still succeeds and the package falls back to the pure-Python kernel at import
time (see qrwalk.kernels). Fast-math and FMA contraction are disabled so the
compiled kernel is bit-identical to the pure-Python one.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qrwalk.kernels._walk_cy",
                sources=["src/qrwalk/kernels/_walk_cy.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
