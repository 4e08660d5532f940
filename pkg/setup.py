import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math / -march=native: the kernels must produce bit-identical
# results to the pure-numpy fallback, so strict IEEE semantics are required.
extensions = [
    Extension(
        "segfuse._kernels._native",
        ["src/segfuse/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
