"""Representation extraction, fidelity-space classifiers and the experiment runners.

A sample's representation is the data-register state of its augmented sample,
``Tr_anc U_aug(theta)(|a><a| (x) |0><0|) U_aug(theta)^dagger``, run through the
noise model when one is configured. Similarities are state overlaps
``Tr(rho sigma)``, which is what a swap test measures.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .augment import EaParams, augment_batch, build_ea_circuit, append_ancilla
from .config import RunConfig
from .data import Dataset, load_cifar, load_idx, make_synthetic, stratified_split, subset
from .encoder import encode_images
from .errors import InsufficientDataError, ParameterError
from .fidelity import overlap_matrix, state_overlap
from .noise import NoiseModel, noisy_adjoint_array, noisy_execute_array
from .qstate import I2, DensityMatrix, StateVector
from .training import TrainHistory, train

MNIST_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")


# -- representations and similarities -----------------------------------------


def reduced_vectors(amps: np.ndarray, params: EaParams) -> np.ndarray:
    """``[N, 2, d]``: the two ancilla branches ``v_j`` with ``rho = sum_j v_j v_j^dagger``."""
    psi = augment_batch(np.asarray(amps, dtype=np.complex128), params)
    return np.swapaxes(psi.reshape(len(amps), 2**params.n_data, 2), 1, 2)


def representations(amps: np.ndarray, params: EaParams, model: NoiseModel | None = None) -> np.ndarray:
    """Reduced data-register density matrices ``[N, d, d]`` (direct, one simulation per sample)."""
    model = model or NoiseModel()
    d = 2**params.n_data
    if model.is_empty:
        v = reduced_vectors(amps, params)
        return np.einsum("nji,njk->nik", v, v.conj())
    ops = build_ea_circuit(params).ops
    out = np.empty((len(amps), d, d), dtype=np.complex128)
    for i, a in enumerate(np.asarray(amps, dtype=np.complex128)):
        x = append_ancilla(a)
        rho = noisy_execute_array(ops, np.outer(x, x.conj()), model, params.n_data + 1)
        out[i] = np.trace(rho.reshape(d, 2, d, 2), axis1=1, axis2=3)
    return out


def similarity_matrix(query: np.ndarray, train_amps: np.ndarray, params: EaParams | None,
                      model: NoiseModel | None = None) -> np.ndarray:
    """``S[q, t] = Tr(R(query_q) R(train_t))`` for amplitude stacks.

    ``params=None`` compares the raw encoded states. With noise, each query
    costs one forward and one adjoint noisy run instead of one run per sample:
    ``Tr(R(a) R(b)) = <a,0| E^dagger(R(b) (x) I) |a,0>``.
    """
    query = np.asarray(query, dtype=np.complex128)
    train_amps = np.asarray(train_amps, dtype=np.complex128)
    if params is None:
        return overlap_matrix(query, train_amps)
    model = model or NoiseModel()
    if model.is_empty:
        vq = reduced_vectors(query, params)
        vt = reduced_vectors(train_amps, params)
        return np.einsum("qjtk->qt", np.abs(np.einsum("qji,tki->qjtk", vq.conj(), vt)) ** 2)
    n = params.n_data + 1
    d = 2**params.n_data
    ops = build_ea_circuit(params).ops
    out = np.empty((len(query), len(train_amps)))
    for i, a in enumerate(query):
        x = append_ancilla(a)
        rho = noisy_execute_array(ops, np.outer(x, x.conj()), model, n)
        red = np.trace(rho.reshape(d, 2, d, 2), axis1=1, axis2=3)
        y = noisy_adjoint_array(ops, np.kron(red, I2), model, n)
        y00 = y.reshape(d, 2, d, 2)[:, 0, :, 0]
        out[i] = np.real(np.einsum("ti,ij,tj->t", train_amps.conj(), y00, train_amps))
    return out


def estimate_similarities(sim: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Swap-test estimates of every entry: ``2 k / shots - 1`` with ``k ~ Bin(shots, (1 + S) / 2)``."""
    rng = np.random.default_rng(seed)
    k = rng.binomial(shots, np.clip((1 + sim) / 2, 0.0, 1.0))
    return np.clip(2.0 * k / shots - 1.0, 0.0, 1.0)


# -- classifiers ----------------------------------------------------------------


def _vote(labels: np.ndarray) -> int:
    classes, counts = np.unique(labels, return_counts=True)
    # np.unique sorts, so argmax picks the smallest id among tied classes
    return int(classes[np.argmax(counts)])


def knn_predict(sim: np.ndarray, train_labels: Sequence[int], k: int) -> np.ndarray:
    """Majority label among the ``k`` most similar training items, per query row."""
    train_labels = np.asarray(train_labels)
    if len(train_labels) == 0:
        raise InsufficientDataError("empty training set")
    if k > len(train_labels):
        raise ParameterError(f"k={k} exceeds the {len(train_labels)} training samples")
    order = np.argsort(-sim, axis=1, kind="stable")[:, :k]
    return np.array([_vote(train_labels[row]) for row in order])


def centroid_predict(sim: np.ndarray, train_labels: Sequence[int]) -> np.ndarray:
    """Class whose mean training representation overlaps most with the query."""
    train_labels = np.asarray(train_labels)
    classes = np.unique(train_labels)
    scores = np.stack([sim[:, train_labels == c].mean(axis=1) for c in classes], axis=1)
    return classes[np.argmax(scores, axis=1)]


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    """``N_correct / N_total``."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise ParameterError("predictions and labels must be non-empty and equally long")
    return float(np.count_nonzero(pred == truth) / pred.size)


def knn_classify(train_states: Sequence[StateVector | DensityMatrix], train_labels: Sequence[int],
                 query: StateVector | DensityMatrix, k: int, fidelity_mode: str = "exact",
                 shots: int = 1024, seed: int = 0) -> int:
    """Single-query k-NN in fidelity space."""
    if len(train_states) == 0:
        raise InsufficientDataError("empty training set")
    sim = np.array([[state_overlap(query, t) for t in train_states]])
    if fidelity_mode == "shots":
        sim = estimate_similarities(sim, shots, seed)
    return int(knn_predict(sim, train_labels, k)[0])


# -- experiment protocol --------------------------------------------------------


@dataclass
class Split:
    train: Dataset
    test: Dataset


@dataclass
class RunMetrics:
    seed: int
    loss_total: list[float] = field(default_factory=list)
    loss_f1: list[float] = field(default_factory=list)
    loss_f2: list[float] = field(default_factory=list)
    acc: float = float("nan")
    wall_s: float = 0.0
    labels_read_in_training: bool = False
    params: EaParams | None = None

    @property
    def acc_max(self) -> float:
        return self.acc

    @property
    def acc_avg(self) -> float:
        return self.acc


@dataclass
class RepeatSummary:
    runs: list[RunMetrics]

    @property
    def accs(self) -> np.ndarray:
        return np.array([r.acc for r in self.runs])

    @property
    def acc_max(self) -> float:
        return float(self.accs.max())

    @property
    def acc_avg(self) -> float:
        return float(self.accs.mean())

    @property
    def acc_median(self) -> float:
        return float(np.median(self.accs))


def repeat_seed(root: int, r: int) -> int:
    """Seed of repeat ``r`` under ``root``."""
    return int(np.random.SeedSequence([int(root), int(r)]).generate_state(1)[0])


_DATA_CACHE: dict[tuple, Dataset] = {}


def load_dataset(config: RunConfig, seed: int) -> Dataset:
    if config.dataset == "synthetic":
        return make_synthetic(max(config.classes) + 1, config.samples_per_class, config.image_size,
                              seed, config.synthetic_noise)
    key = (config.dataset, config.dataset_path)
    if key not in _DATA_CACHE:
        root = Path(config.dataset_path)
        if config.dataset in ("mnist", "idx"):
            ds = load_idx(root / MNIST_FILES[0], root / MNIST_FILES[1], config.dataset)
        elif config.dataset == "cifar":
            ds = load_cifar(sorted(root.glob("data_batch_*.bin")))
        else:
            raise ParameterError(f"unknown dataset {config.dataset!r}")
        _DATA_CACHE[key] = ds
    ds = _DATA_CACHE[key]
    return Dataset(ds.images, ds._labels, ds.name)


def prepare(config: RunConfig) -> Split:
    rng = np.random.default_rng(config.seed)
    subset_seed, split_seed = (int(s) for s in rng.integers(2**31, size=2))
    ds = load_dataset(config, subset_seed)
    few = subset(ds, config.classes, config.samples_per_class, subset_seed)
    train_ds, test_ds = stratified_split(few, config.test_fraction, split_seed)
    if len(test_ds) == 0:
        raise InsufficientDataError("the split left no test samples")
    return Split(train_ds, test_ds)


def fit(train_ds: Dataset, config: RunConfig) -> tuple[EaParams, TrainHistory]:
    """Self-supervised fit; only pixels are read."""
    return train(encode_images(train_ds.images, config.n_qubits), config)


def evaluate(config: RunConfig, trained: EaParams, split: Split | None = None) -> RunMetrics:
    split = split or prepare(config)
    train_amps = encode_images(split.train.images, config.n_qubits)
    test_amps = encode_images(split.test.images, config.n_qubits)
    sim = similarity_matrix(test_amps, train_amps, trained, config.noise_model())
    if config.fidelity_mode == "shots":
        sim = estimate_similarities(sim, config.shots, config.seed)
    train_labels = split.train.labels
    if config.classifier == "knn":
        pred = knn_predict(sim, train_labels, min(config.k, len(train_labels)))
    else:
        pred = centroid_predict(sim, train_labels)
    acc = accuracy(pred, split.test.labels)
    return RunMetrics(seed=config.seed, acc=acc, params=trained)


def run_experiment(config: RunConfig) -> RunMetrics:
    start = time.perf_counter()
    split = prepare(config)
    reads = (split.train.label_reads, split.test.label_reads)
    params, hist = fit(split.train, config)
    leaked = (split.train.label_reads, split.test.label_reads) != reads
    metrics = evaluate(config, params, split)
    metrics.loss_total, metrics.loss_f1, metrics.loss_f2 = hist.loss_total, hist.loss_f1, hist.loss_f2
    metrics.labels_read_in_training = leaked
    metrics.wall_s = time.perf_counter() - start
    return metrics


def worker_count() -> int:
    n = int(os.environ.get("QSEA_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def run_configs(configs: Sequence[RunConfig]) -> list[RunMetrics]:
    workers = min(worker_count(), len(configs))
    if workers <= 1:
        return [run_experiment(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


def run_repeats(config: RunConfig, repeats: int | None = None) -> RepeatSummary:
    repeats = config.repeats if repeats is None else repeats
    configs = [config.replace(seed=repeat_seed(config.seed, r)) for r in range(repeats)]
    return RepeatSummary(run_configs(configs))


AXES = ("classes", "qubits", "samples")


def config_for_axis(config: RunConfig, axis: str, value) -> RunConfig:
    if axis == "classes":
        return config.replace(classes=tuple(range(int(value))))
    if axis == "qubits":
        return config.replace(n_qubits=int(value))
    if axis == "samples":
        return config.replace(samples_per_class=int(value))
    if axis == "noise_p":
        p = float(value)
        return config.replace(noise="composite" if p > 0 else "none", noise_p=p)
    raise ParameterError(f"unknown ablation axis {axis!r}")


def run_ablation(config: RunConfig, axis: str, values: Sequence, repeats: int | None = None) -> dict:
    """``{value: RepeatSummary}``; repeat ``r`` uses the same seed for every value."""
    repeats = config.repeats if repeats is None else repeats
    out = {}
    for v in values:
        cfg = config_for_axis(config, axis, v)
        configs = [cfg.replace(seed=repeat_seed(config.seed, r)) for r in range(repeats)]
        out[v] = RepeatSummary(run_configs(configs))
    return out
