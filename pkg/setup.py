from setuptools import Extension, setup

# The compiled residual kernel is optional: moseg falls back to the numpy
# twin (moseg._kernels_py) when the extension is absent.
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "moseg._kernels",
                ["src/moseg/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the C arithmetic bit-identical to
                # the numpy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
