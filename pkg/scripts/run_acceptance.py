"""Run the acceptance suite and print its PASS/FAIL lines.

    python3 scripts/run_acceptance.py [--fast]

``--fast`` skips the full 40-trial experiment criterion.
"""

import argparse
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fast", action="store_true", help="skip the slow experiment criterion")
    args = p.parse_args(argv)
    pytest_args = [str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    if args.fast:
        pytest_args += ["-m", "not slow"]
    return int(pytest.main(pytest_args))


if __name__ == "__main__":
    sys.exit(main())
