"""Optimiser and training loop for the augmentation angles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .augment import EaParams, project_theta
from .errors import InsufficientDataError
from .gradients import batch_loss_and_grad
from .losses import FidelityMode, LossWeights, as_amplitudes, batch_loss_parts, sample_triplets


class Adam:
    """Bias-corrected adaptive moment estimation for a single flat parameter vector."""

    def __init__(self, size: int, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainState:
    params: EaParams
    optimizer: Adam
    seed: int
    epoch: int = 0


@dataclass
class TrainHistory:
    loss_total: list[float] = field(default_factory=list)
    loss_f1: list[float] = field(default_factory=list)
    loss_f2: list[float] = field(default_factory=list)


def run_epoch(state: TrainState, amps: np.ndarray, batch: int, weights: LossWeights,
              rng: np.random.Generator, mode: FidelityMode | None = None) -> tuple[float, float, float]:
    """One pass: ``ceil(N / batch)`` steps, each on a freshly sampled triplet batch.

    Returns the epoch means of the step losses, each taken before its update.
    """
    steps = math.ceil(len(amps) / batch)
    totals, f1s, f2s = [], [], []
    for _ in range(steps):
        triplets = sample_triplets(len(amps), batch, rng)
        total, l1, l2, grad = batch_loss_and_grad(amps, triplets, state.params, weights)
        if mode is not None and not mode.exact:
            step_mode = FidelityMode(mode.shots, int(rng.integers(2**31)))
            parts = batch_loss_parts(amps, triplets, state.params, weights, step_mode)
            total, l1, l2 = parts.total, parts.f1, parts.f2
        totals.append(total)
        f1s.append(l1)
        f2s.append(l2)
        theta = project_theta(state.optimizer.step(state.params.theta, grad))
        state.params = state.params.with_theta(theta)
    state.epoch += 1
    return float(np.mean(totals)), float(np.mean(f1s)), float(np.mean(f2s))


def train(dataset, config) -> tuple[EaParams, TrainHistory]:
    """Fit the augmentation angles on unlabelled states.

    ``dataset`` is a list of :class:`StateVector` or an amplitude array ``[N, 2**n]``;
    ``config`` is a :class:`~qsea.config.RunConfig`. Deterministic in ``config.seed``.
    """
    amps = as_amplitudes(dataset) if len(dataset) else np.zeros((0, 2**config.n_qubits))
    if len(amps) < 2:
        raise InsufficientDataError("training needs at least two samples")
    rng = np.random.default_rng(config.seed)
    params = EaParams.random(config.n_qubits, config.layers, rng)
    state = TrainState(params, Adam(params.theta.size, lr=config.lr), config.seed)
    weights = LossWeights(config.alpha, config.beta, config.eps)
    mode = FidelityMode(config.shots if config.fidelity_mode == "shots" else 0, config.seed)
    history = TrainHistory()
    for _ in range(config.epochs):
        total, l1, l2 = run_epoch(state, amps, config.batch, weights, rng, mode)
        history.loss_total.append(total)
        history.loss_f1.append(l1)
        history.loss_f2.append(l2)
    return state.params, history
