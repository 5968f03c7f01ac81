#!/usr/bin/env python3
"""MNIST {0, 1} experiment: seeded repeats, each scored without and with composite noise.

Writes results/mnist.csv (noiseless runs, axis "noise_p" = 0) and appends the noisy
evaluations of the same trained angles with axis value = the noise probability.
"""

import argparse
import time

import numpy as np

from qsea.config import RunConfig
from qsea.evaluation import evaluate, prepare, repeat_seed, run_experiment
from qsea.report import CsvWriter


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data/mnist")
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise-p", type=float, default=0.01)
    ap.add_argument("--out", default="results/mnist.csv")
    args = ap.parse_args()

    base = RunConfig(dataset="mnist", dataset_path=args.data)
    clean, noisy = [], []
    with CsvWriter(args.out) as w:
        for r in range(args.repeats):
            cfg = base.replace(seed=repeat_seed(args.seed, r))
            split = prepare(cfg)
            m = run_experiment(cfg)
            w.write_run(m, "noise_p", 0.0)
            t0 = time.perf_counter()
            n = evaluate(cfg.replace(noise="composite", noise_p=args.noise_p), m.params, split)
            n.wall_s = time.perf_counter() - t0
            n.loss_total, n.loss_f1, n.loss_f2 = m.loss_total, m.loss_f1, m.loss_f2
            w.write_run(n, "noise_p", args.noise_p)
            clean.append(m.acc)
            noisy.append(n.acc)
            print(f"repeat {r}: acc={m.acc:.3f} noisy={n.acc:.3f}", flush=True)
    clean, noisy = np.array(clean), np.array(noisy)
    print(f"noiseless: avg={clean.mean():.4f} max={clean.max():.4f}")
    print(f"noisy p={args.noise_p}: avg={noisy.mean():.4f} max={noisy.max():.4f}")
    print(f"drop: {clean.mean() - noisy.mean():+.4f}")


if __name__ == "__main__":
    main()
