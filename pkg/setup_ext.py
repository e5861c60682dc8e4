"""Optional build of the compiled kernel extension.

    python setup_ext.py build_ext --inplace

Drops ``aperiodic/_kernels/_fast.*.so`` next to the pure fallback; the
package selects whichever is importable, so this step is never required.
"""

from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np

ext = Extension(
    "aperiodic._kernels._fast",
    sources=["src/aperiodic/_kernels/_fast.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(
    ext_modules=cythonize([ext], language_level=3),
    script_args=None,
    package_dir={"": "src"},
)
