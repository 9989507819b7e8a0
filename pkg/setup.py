"""Build script for the optional compiled integrator core.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed cythonization degrades to a pure-Python
install instead of aborting.

Name/version and the src layout are repeated here so that legacy setuptools
code paths (which ignore the pyproject metadata tables) still produce a
working, importable install; full metadata (entry points, dependencies)
needs setuptools >= 68.
"""

from setuptools import find_packages, setup

ext_modules = []
try:
    import numpy as np
    from setuptools import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        Extension(
            "nhq._accel._core",
            ["src/nhq/_accel/_core.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        ),
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"nhq: compiled core skipped ({exc}); pure-Python backend will be used")

setup(
    name="nhq",
    version="0.1.0",
    package_dir={"": "src"},
    packages=find_packages("src"),
    ext_modules=ext_modules,
)
