#!/usr/bin/env python3
"""Write MNIST digits as IDX files under data/mnist (from the mlxtend sample)."""

import argparse
from pathlib import Path

from qsea.data import export_mlxtend_mnist, load_idx

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "mnist"))
    args = ap.parse_args()
    out = export_mlxtend_mnist(args.out)
    ds = load_idx(out / "train-images-idx3-ubyte", out / "train-labels-idx1-ubyte")
    print(f"wrote {len(ds)} images to {out}")
