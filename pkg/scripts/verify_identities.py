#!/usr/bin/env python3
"""Run the exact generating-function identity and inequality suites.

Exits nonzero if any identity fails; equivalent to `eralign verify-gf`.
"""

import argparse
import sys
import time

from eralign.experiment import verify_gf


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=8, help="max cycle length (<= 8)")
    args = ap.parse_args()
    t0 = time.perf_counter()
    report = verify_gf(depth=args.depth)
    for line in report.lines():
        print(line)
    print(f"{time.perf_counter() - t0:.1f}s")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
