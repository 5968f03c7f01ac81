"""Metrics CSV emission and SVG charts."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError

HEADER = ("run_id", "seed", "axis", "value", "epoch", "loss_total", "loss_f1", "loss_f2", "acc", "wall_s")


@dataclass(frozen=True)
class Row:
    """One CSV line. Per-epoch rows carry losses; ``acc`` and ``wall_s`` repeat the run's final values."""

    run_id: int
    seed: int
    axis: str
    value: str
    epoch: int
    loss_total: float
    loss_f1: float
    loss_f2: float
    acc: float
    wall_s: float

    def cells(self) -> list[str]:
        return [str(self.run_id), str(self.seed), self.axis, self.value, str(self.epoch),
                repr(self.loss_total), repr(self.loss_f1), repr(self.loss_f2), repr(self.acc), repr(self.wall_s)]


def rows_for_run(run_id: int, metrics, axis: str = "none", value="") -> list[Row]:
    """Rows for one :class:`RunMetrics`; a run trained for zero epochs gets a single ``epoch = 0`` row."""
    n = len(metrics.loss_total)
    base = dict(run_id=run_id, seed=int(metrics.seed), axis=axis, value=str(value),
                acc=float(metrics.acc), wall_s=float(metrics.wall_s))
    if n == 0:
        return [Row(epoch=0, loss_total=math.nan, loss_f1=math.nan, loss_f2=math.nan, **base)]
    return [Row(epoch=e + 1, loss_total=float(metrics.loss_total[e]), loss_f1=float(metrics.loss_f1[e]),
                loss_f2=float(metrics.loss_f2[e]), **base) for e in range(n)]


def final_rows(rows: Iterable[Row]) -> list[Row]:
    """The last-epoch row of every run, in first-seen order."""
    last: dict[int, Row] = {}
    for r in rows:
        if r.run_id not in last or r.epoch >= last[r.run_id].epoch:
            last[r.run_id] = r
    return list(last.values())


class CsvWriter:
    """Single serialized writer; the header is written once on open."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(HEADER)
        self.next_run_id = 0

    def write_rows(self, rows: Iterable[Row]) -> None:
        for r in rows:
            self._w.writerow(r.cells())
        self._fh.flush()

    def write_run(self, metrics, axis: str = "none", value="") -> int:
        run_id = self.next_run_id
        self.next_run_id += 1
        self.write_rows(rows_for_run(run_id, metrics, axis, value))
        return run_id

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "CsvWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_csv(path: str | Path, rows: Iterable[Row]) -> None:
    with CsvWriter(path) as w:
        w.write_rows(rows)


def read_csv(path: str | Path) -> list[Row]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != HEADER:
            raise FormatError(f"{path}: unexpected header {header}")
        out = []
        for lineno, cells in enumerate(reader, 2):
            if len(cells) != len(HEADER):
                raise FormatError(f"{path}:{lineno}: expected {len(HEADER)} fields, got {len(cells)}")
            try:
                out.append(Row(int(cells[0]), int(cells[1]), cells[2], cells[3], int(cells[4]),
                               *(float(c) for c in cells[5:])))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
        return out


def _sort_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def summarize(rows: Iterable[Row]) -> dict[str, dict[str, list[float]]]:
    """``{axis: {value: [final acc per run]}}``."""
    out: dict[str, dict[str, list[float]]] = {}
    for r in final_rows(rows):
        out.setdefault(r.axis, {}).setdefault(r.value, []).append(r.acc)
    return {a: dict(sorted(v.items(), key=lambda kv: _sort_key(kv[0]))) for a, v in out.items()}


def plot_loss(rows: Sequence[Row], path: str | Path) -> Path:
    """Mean per-epoch loss curves (total, F1, F2) across runs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    by_epoch: dict[int, list[Row]] = {}
    for r in rows:
        if r.epoch > 0:
            by_epoch.setdefault(r.epoch, []).append(r)
    epochs = sorted(by_epoch)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("loss_total", "loss_f1", "loss_f2"):
        ax.plot(epochs, [np.nanmean([getattr(r, name) for r in by_epoch[e]]) for e in epochs], label=name)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)


def plot_accuracy(rows: Sequence[Row], path: str | Path) -> Path:
    """Bars of max and average final accuracy per (axis, value)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    labels, maxes, means = [], [], []
    for axis, cells in summarize(rows).items():
        for value, accs in cells.items():
            labels.append(f"{axis}={value}" if value else axis)
            maxes.append(max(accs))
            means.append(float(np.mean(accs)))
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(labels)), 4))
    ax.bar(x - 0.2, maxes, 0.4, label="max")
    ax.bar(x + 0.2, means, 0.4, label="avg")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("accuracy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)
