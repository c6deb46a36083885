"""Build script for the optional compiled elimination kernel.

The package is pure Python; the Cython extension twistchain._elim_c is a
drop-in twin of twistchain._elim and is skipped (with a warning) when it
cannot be built.  `pip install -e . --no-build-isolation` builds it in place.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/twistchain/_elim_c.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    import sys

    print("twistchain: skipping compiled kernel (%s)" % exc, file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
