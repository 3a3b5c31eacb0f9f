#!/usr/bin/env python3
"""Run every named worked example and print a one-line summary for each.

Thin wrapper over `qnetopt example NAME`; useful as a smoke test after
changes to the solver.
"""

import sys
import time

from qnetopt.cli import EXAMPLE_NAMES, main


def run(name: str, extra) -> int:
    t0 = time.time()
    rc = main(["example", name, "--quiet"] + extra + ["--out", "/dev/null"])
    print("%-13s rc=%d  %.2fs" % (name, rc, time.time() - t0))
    return rc


if __name__ == "__main__":
    extras = {"phase": ["--levels", "3"],
              "sum-phases": ["--levels", "8", "--copies", "2"],
              "two-phase": ["--p", "0.7"]}
    worst = 0
    for name in EXAMPLE_NAMES:
        worst = max(worst, run(name, extras.get(name, [])))
    sys.exit(worst)
