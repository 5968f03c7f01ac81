"""Command-line entry point: ``qsea {train,eval,ablate,noise-sweep,plot}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .augment import EaParams
from .config import RunConfig, load_config
from .evaluation import AXES, evaluate, repeat_seed, run_ablation, run_configs
from .report import CsvWriter, plot_accuracy, plot_loss, read_csv, summarize

DEFAULT_AXIS_VALUES = {"classes": (2, 4, 6), "qubits": (6, 8, 10), "samples": (10, 30, 50)}
DEFAULT_NOISE_VALUES = (0.0, 0.005, 0.01, 0.02)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.repeats is not None:
        changes["repeats"] = args.repeats
    return cfg.replace(**changes)


def _values(raw: str | None, default, cast):
    if raw is None:
        return tuple(default)
    return tuple(cast(v) for v in raw.split(",") if v.strip())


def _print_summary(label: str, accs) -> None:
    accs = np.asarray(accs, dtype=float)
    print(f"{label}: runs={len(accs)} acc_max={accs.max():.4f} acc_avg={accs.mean():.4f}")


def cmd_train(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    configs = [cfg.replace(seed=repeat_seed(cfg.seed, r)) for r in range(cfg.repeats)]
    runs = run_configs(configs)
    thetas = {}
    with CsvWriter(out / "train.csv") as w:
        for m in runs:
            run_id = w.write_run(m)
            thetas[f"run{run_id}"] = m.params.theta
    np.savez(out / "params.npz", n_data=cfg.n_qubits, layers=cfg.layers,
             seeds=np.array([m.seed for m in runs], dtype=np.uint64), **thetas)
    _print_summary("train", [m.acc for m in runs])
    return 0


def load_params(path: str | Path, run: int = 0) -> EaParams:
    with np.load(path) as z:
        return EaParams(int(z["n_data"]), int(z["layers"]), z[f"run{run}"])


def cmd_eval(args) -> int:
    cfg = _config(args)
    params = load_params(args.params, args.run)
    cfg = cfg.replace(n_qubits=params.n_data, layers=params.layers)
    runs = []
    with CsvWriter(Path(args.out) / "eval.csv") as w:
        for r in range(cfg.repeats):
            m = evaluate(cfg.replace(seed=repeat_seed(cfg.seed, r)), params)
            w.write_run(m, axis="eval")
            runs.append(m)
    _print_summary("eval", [m.acc for m in runs])
    return 0


def _sweep(cfg: RunConfig, axis: str, values, path: Path) -> None:
    results = run_ablation(cfg, axis, values)
    with CsvWriter(path) as w:
        for value, summary in results.items():
            for m in summary.runs:
                w.write_run(m, axis=axis, value=value)
            _print_summary(f"{axis}={value}", summary.accs)


def cmd_ablate(args) -> int:
    cfg = _config(args)
    values = _values(args.values, DEFAULT_AXIS_VALUES[args.axis], int)
    _sweep(cfg, args.axis, values, Path(args.out) / f"ablate_{args.axis}.csv")
    return 0


def cmd_noise_sweep(args) -> int:
    cfg = _config(args)
    values = _values(args.values, DEFAULT_NOISE_VALUES, float)
    _sweep(cfg, "noise_p", values, Path(args.out) / "noise_sweep.csv")
    return 0


def cmd_plot(args) -> int:
    rows = read_csv(args.csv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.csv).stem
    print(plot_loss(rows, out / f"{stem}_loss.svg"))
    print(plot_accuracy(rows, out / f"{stem}_acc.svg"))
    for axis, cells in summarize(rows).items():
        for value, accs in cells.items():
            _print_summary(f"{axis}={value}" if value else axis, accs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="root seed (overrides the config)")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--repeats", type=int, help="seeded repeats (overrides the config)")

    parser = argparse.ArgumentParser(prog="qsea", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train and evaluate; writes train.csv and params.npz")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate saved angles; writes eval.csv")
    p.add_argument("--params", required=True, help="params.npz written by train")
    p.add_argument("--run", type=int, default=0, help="which saved run to load")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", parents=[common], help="sweep one axis; writes ablate_<axis>.csv")
    p.add_argument("--axis", required=True, choices=AXES)
    p.add_argument("--values", help="comma-separated values (default depends on the axis)")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("noise-sweep", parents=[common], help="sweep the per-channel noise probability")
    p.add_argument("--values", help="comma-separated probabilities")
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("plot", help="SVG charts from a metrics CSV")
    p.add_argument("csv")
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
