#!/usr/bin/env python3
"""Reproduce the strong-scaling and ablation tables.

Writes results/simulate.csv, results/ablate.csv, results/ccp.csv and
prints each table to stdout.
"""

import os
import sys

from acap_gemm.cli import main

RESULTS = os.path.join(os.path.dirname(__file__), os.pardir, "results")


def run(name, argv):
    os.makedirs(RESULTS, exist_ok=True)
    out = os.path.join(RESULTS, f"{name}.csv")
    code = main(argv + ["--out", out])
    print(f"== {name} (exit {code}) -> {out}")
    with open(out, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                print(" ", line, end="")
    print()
    return code


if __name__ == "__main__":
    worst = 0
    worst = max(worst, run("simulate", ["simulate"]))
    worst = max(worst, run("ablate", ["ablate"]))
    # exit 3 expected here: the published nc=1200 overflows the Block RAM
    run("ccp", ["ccp"])
    sys.exit(worst)
