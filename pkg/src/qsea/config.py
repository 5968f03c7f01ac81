"""Run configuration and its flat ``key = value`` file format.

Grammar, one entry per line::

    # comment
    key = value        # trailing comments are allowed
    classes = 0, 1     # tuples are comma-separated

Unknown keys are rejected; missing keys take the defaults below.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .noise import CHANNELS, NoiseModel


@dataclass(frozen=True)
class RunConfig:
    n_qubits: int = 8
    layers: int = 2
    samples_per_class: int = 50
    classes: tuple[int, ...] = (0, 1)
    alpha: float = 0.5
    beta: float = 1.0
    eps: float = 1e-6
    epochs: int = 30
    batch: int = 16
    lr: float = 0.01
    seed: int = 0
    fidelity_mode: str = "exact"
    shots: int = 1024
    noise: str = "none"
    noise_p: float = 0.01
    noise_channels: tuple[str, ...] = ("bit_flip", "phase_flip", "depolarizing")
    noise_placement: str = "after_gate"
    dataset: str = "synthetic"
    dataset_path: str = ""
    image_size: int = 32
    synthetic_noise: int = 160
    test_fraction: float = 0.2
    k: int = 5
    classifier: str = "knn"
    repeats: int = 1

    def __post_init__(self):
        if not 1 <= self.n_qubits <= 12:
            raise ConfigError("n_qubits must be in [1, 12]")
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be >= 1")
        if self.k < 1 or self.k % 2 == 0:
            raise ConfigError("k must be a positive odd integer")
        if len(self.classes) < 2 or len(set(self.classes)) != len(self.classes):
            raise ConfigError("need at least two distinct classes")
        if self.fidelity_mode not in ("exact", "shots"):
            raise ConfigError("fidelity_mode must be 'exact' or 'shots'")
        if self.noise not in ("none", "composite"):
            raise ConfigError("noise must be 'none' or 'composite'")
        if self.noise_placement != "after_gate":
            raise ConfigError("only 'after_gate' noise placement is supported")
        for ch in self.noise_channels:
            if ch not in CHANNELS:
                raise ConfigError(f"unknown noise channel {ch!r}")
        if self.classifier not in ("knn", "centroid"):
            raise ConfigError("classifier must be 'knn' or 'centroid'")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie strictly between 0 and 1")
        for name in ("layers", "batch", "repeats", "shots", "image_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def noise_model(self) -> NoiseModel:
        if self.noise == "none":
            return NoiseModel()
        return NoiseModel.from_spec(self.noise_channels, self.noise_p)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(name: str, raw: str):
    default = _FIELDS[name].default
    try:
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], int):
                return tuple(int(s) for s in items)
            return tuple(items)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    return (base or RunConfig()).replace(**values)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


def format_config(cfg: RunConfig) -> str:
    lines = []
    for name in _FIELDS:
        v = getattr(cfg, name)
        lines.append(f"{name} = {', '.join(map(str, v)) if isinstance(v, tuple) else v}")
    return "\n".join(lines) + "\n"
