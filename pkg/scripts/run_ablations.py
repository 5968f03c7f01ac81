#!/usr/bin/env python3
"""Synthetic-data sweeps over classes, samples per class and qubit count, plus SVG charts."""

import argparse
import sys
from pathlib import Path

from qsea.cli import main as cli

AXES = {"classes": "2,4,6", "samples": "10,30,50", "qubits": "6,8,10"}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--out", default="results")
    ap.add_argument("--axes", default=",".join(AXES))
    args = ap.parse_args()
    for axis in args.axes.split(","):
        print(f"== {axis}", flush=True)
        cli(["ablate", "--axis", axis, "--values", AXES[axis], "--repeats", str(args.repeats), "--out", args.out])
        cli(["plot", str(Path(args.out) / f"ablate_{axis}.csv"), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
