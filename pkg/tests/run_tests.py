#!/usr/bin/env python3
"""
Run the unittest suite.

    python tests/run_tests.py            fast tests
    HOLONOMY_SLOW_TESTS=1 python tests/run_tests.py   acceptance-size runs too
"""

import os
import sys
import unittest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main():
    if ROOT not in sys.path:
        sys.path.insert(0, ROOT)
    suite = unittest.defaultTestLoader.discover(os.path.join(ROOT, "tests"), top_level_dir=ROOT)
    result = unittest.TextTestRunner(verbosity=2).run(suite)
    if result.wasSuccessful():
        print("✅ All tests passed")
        return 0
    print(f"❌ {len(result.failures)} failures, {len(result.errors)} errors")
    return 1


if __name__ == "__main__":
    sys.exit(main())
