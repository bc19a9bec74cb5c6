"""Build hook: compile the membership stepper with Cython when available.

The engine works unchanged without the extension; `scenquery.engine.backend`
reports which variant was imported.  Set SCENQUERY_NO_EXT=1 to skip the build.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SCENQUERY_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/scenquery/engine/_stepper.py"],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "initializedcheck": False,
            },
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
