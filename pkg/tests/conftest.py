import os
import sys

import pytest

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
if TESTS_DIR not in sys.path:
    sys.path.insert(0, TESTS_DIR)

A4_DIR = os.path.join(TESTS_DIR, "data", "a4")


@pytest.fixture(scope="session")
def a4_programs():
    """The 16 benchmark-family fixture programs, keyed by file stem."""
    out = {}
    for name in sorted(os.listdir(A4_DIR)):
        if name.endswith(".scenic"):
            with open(os.path.join(A4_DIR, name), "r", encoding="utf-8") as fh:
                out[name[: -len(".scenic")]] = fh.read()
    return out
