"""Fidelity-driven contrastive losses and triplet sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .augment import EaParams, positive_fidelity_batch
from .errors import ArityError, DimensionError, InsufficientDataError, ParameterError
from .fidelity import derive_seed, swap_test_from_p0
from .qstate import StateVector

DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class Triplet:
    anchor_id: int
    negative_id: int

    def __post_init__(self):
        if self.anchor_id == self.negative_id:
            raise ParameterError("anchor and negative must be different samples")


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.5
    beta: float = 1.0
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError("loss weights must be non-negative")
        if self.alpha == 0 and self.beta == 0:
            raise ParameterError("alpha and beta cannot both be zero")
        if self.eps < 0:
            raise ParameterError("eps must be non-negative")


@dataclass(frozen=True)
class FidelityMode:
    """``shots == 0`` means exact fidelities; otherwise swap-test estimates."""

    shots: int = 0
    seed: int = 0

    @property
    def exact(self) -> bool:
        return self.shots == 0


EXACT = FidelityMode()


def sample_triplets(dataset_size: int, batch: int, seed: int | np.random.Generator) -> list[Triplet]:
    """Uniform anchors, and negatives uniform over every other index."""
    if dataset_size < 2:
        raise InsufficientDataError("need at least two samples to form triplets")
    if batch < 1:
        raise ParameterError("batch must be positive")
    rng = np.random.default_rng(seed)
    anchors = rng.integers(dataset_size, size=batch)
    negs = rng.integers(dataset_size - 1, size=batch)
    negs = negs + (negs >= anchors)
    return [Triplet(int(a), int(n)) for a, n in zip(anchors, negs)]


def loss_f1(fidelities_p, eps: float = DEFAULT_EPS) -> float:
    """Mean of ``1 / (1 - F + eps)`` over the positive fidelities."""
    f = np.asarray(fidelities_p, dtype=np.float64)
    if f.size == 0:
        raise ArityError("loss_f1 needs at least one fidelity")
    # sorted summation keeps the mean bit-identical under reordering
    return float(np.mean(np.sort(1.0 / (1.0 - f + eps))))


def loss_f2(fidelities_n) -> float:
    f = np.asarray(fidelities_n, dtype=np.float64)
    if f.size == 0:
        raise ArityError("loss_f2 needs at least one fidelity")
    return float(np.mean(np.sort(f)))


def total_loss(l_f1: float, l_f2: float, w: LossWeights) -> float:
    return w.beta * l_f2 - w.alpha * l_f1


@dataclass(frozen=True)
class LossParts:
    total: float
    f1: float
    f2: float
    fid_pos: np.ndarray
    fid_neg: np.ndarray


def as_amplitudes(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return samples.astype(np.complex128, copy=False)
    return np.stack([s.amps for s in samples])


def triplet_fidelities(
    amps: np.ndarray, triplets: Sequence[Triplet], p: EaParams, mode: FidelityMode = EXACT
) -> tuple[np.ndarray, np.ndarray]:
    """Positive (augmented, reduced) and negative fidelities for each triplet."""
    if amps.shape[-1] != 2**p.n_data:
        raise DimensionError(f"samples have dimension {amps.shape[-1]}, parameters expect {2 ** p.n_data}")
    a_idx = np.array([t.anchor_id for t in triplets])
    n_idx = np.array([t.negative_id for t in triplets])
    anchors = amps[a_idx]
    fp = positive_fidelity_batch(anchors, p)
    fn = np.abs(np.sum(anchors.conj() * amps[n_idx], axis=1)) ** 2
    fp, fn = np.clip(fp, 0.0, 1.0), np.clip(fn, 0.0, 1.0)
    if not mode.exact:
        # the swap-test readout depends on the inputs only through P(0) = (1 + F) / 2
        fp = np.array([
            swap_test_from_p0((1 + f) / 2, mode.shots, derive_seed(mode.seed, 2 * i)).value
            for i, f in enumerate(fp)
        ])
        fn = np.array([
            swap_test_from_p0((1 + f) / 2, mode.shots, derive_seed(mode.seed, 2 * i + 1)).value
            for i, f in enumerate(fn)
        ])
    return fp, fn


def batch_loss_parts(samples, triplets: Sequence[Triplet], p: EaParams, w: LossWeights,
                     mode: FidelityMode = EXACT) -> LossParts:
    fp, fn = triplet_fidelities(as_amplitudes(samples), triplets, p, mode)
    l1, l2 = loss_f1(fp, w.eps), loss_f2(fn)
    return LossParts(total_loss(l1, l2, w), l1, l2, fp, fn)


def batch_loss(samples: Sequence[StateVector] | np.ndarray, triplets: Sequence[Triplet], p: EaParams,
               w: LossWeights, fidelity_mode: FidelityMode = EXACT) -> float:
    return batch_loss_parts(samples, triplets, p, w, fidelity_mode).total
