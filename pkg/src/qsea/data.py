"""Datasets: IDX and CIFAR-10 binary readers, synthetic generator, few-shot subsets."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .encoder import RawImage
from .errors import ConsistencyError, FormatError, InsufficientDataError, TruncatedFileError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD = 3073


class Dataset:
    """Grayscale image stack plus labels.

    Labels sit behind a counting accessor so tests can assert that the
    self-supervised training path never looks at them.
    """

    def __init__(self, images: np.ndarray, labels: np.ndarray, name: str = ""):
        images = np.asarray(images, dtype=np.uint8)
        labels = np.asarray(labels, dtype=np.int64)
        if images.ndim != 3:
            raise FormatError(f"images must be [N, h, w], got shape {images.shape}")
        if len(images) != len(labels):
            raise ConsistencyError(f"{len(images)} images but {len(labels)} labels")
        self.images = images
        self._labels = labels
        self.name = name
        self.label_reads = 0

    @property
    def labels(self) -> np.ndarray:
        self.label_reads += 1
        return self._labels

    def __len__(self) -> int:
        return len(self.images)

    def image(self, i: int) -> RawImage:
        return RawImage.from_array(self.images[i])

    def take(self, idx) -> "Dataset":
        return Dataset(self.images[idx], self._labels[idx], self.name)


def _read_be32(buf: bytes, offset: int) -> int:
    return struct.unpack_from(">I", buf, offset)[0]


def _read_idx(path: str | Path, magic: int) -> np.ndarray:
    buf = Path(path).read_bytes()
    if len(buf) < 4:
        raise FormatError(f"{path}: file too short for an IDX header")
    got = _read_be32(buf, 0)
    if got != magic:
        raise FormatError(f"{path}: magic 0x{got:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(buf) < header:
        raise TruncatedFileError(f"{path}: truncated header")
    dims = [_read_be32(buf, 4 + 4 * i) for i in range(ndim)]
    size = int(np.prod(dims))
    if len(buf) - header < size:
        raise TruncatedFileError(f"{path}: expected {size} bytes of data, found {len(buf) - header}")
    return np.frombuffer(buf, dtype=np.uint8, count=size, offset=header).reshape(dims)


def load_idx(images_path: str | Path, labels_path: str | Path, name: str = "idx") -> Dataset:
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if len(images) != len(labels):
        raise ConsistencyError(f"{len(images)} images but {len(labels)} labels")
    return Dataset(images, labels, name)


def write_idx(images_path: str | Path, labels_path: str | Path, images: np.ndarray, labels: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        f.write(labels.tobytes())


def load_cifar(paths: Sequence[str | Path], name: str = "cifar10") -> Dataset:
    """CIFAR-10 binary batches (label byte then 3x32x32 channel-major pixels), averaged to grayscale."""
    images, labels = [], []
    for path in paths:
        buf = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
        if buf.size == 0 or buf.size % CIFAR_RECORD:
            raise TruncatedFileError(f"{path}: size {buf.size} is not a multiple of {CIFAR_RECORD}")
        rec = buf.reshape(-1, CIFAR_RECORD)
        labels.append(rec[:, 0])
        rgb = rec[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64)
        images.append(np.rint(rgb.mean(axis=1)).astype(np.uint8))
    return Dataset(np.concatenate(images), np.concatenate(labels), name)


def class_template(c: int, n_classes: int, image_size: int, level: int = 255) -> np.ndarray:
    """Class ``c`` lights its own cell of a near-square grid of ``n_classes`` cells."""
    g_rows = int(np.ceil(np.sqrt(n_classes)))
    g_cols = int(np.ceil(n_classes / g_rows))
    r, col = divmod(c, g_cols)
    re = (np.arange(g_rows + 1) * image_size) // g_rows
    ce = (np.arange(g_cols + 1) * image_size) // g_cols
    img = np.zeros((image_size, image_size), dtype=np.int64)
    img[re[r]:re[r + 1], ce[col]:ce[col + 1]] = level
    return img


def make_synthetic(n_classes: int, per_class: int, image_size: int = 32, seed: int = 0,
                   noise: int = 160, level: int = 255) -> Dataset:
    """Block templates plus seeded uniform pixel noise in ``[0, noise]``, clamped to [0, 255]."""
    if n_classes < 2:
        raise InsufficientDataError("synthetic data needs at least two classes")
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for c in range(n_classes):
        tpl = class_template(c, n_classes, image_size, level)
        extra = rng.integers(0, noise + 1, size=(per_class, image_size, image_size))
        images.append(np.clip(tpl + extra, 0, 255))
        labels.append(np.full(per_class, c))
    return Dataset(np.concatenate(images).astype(np.uint8), np.concatenate(labels), "synthetic")


def subset(ds: Dataset, classes: Sequence[int], per_class: int, seed: int) -> Dataset:
    """``per_class`` samples of each listed class, drawn without replacement."""
    rng = np.random.default_rng(seed)
    labels = ds.labels
    picked = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < per_class:
            raise InsufficientDataError(f"class {c} has {len(idx)} samples, {per_class} requested")
        picked.append(np.sort(rng.choice(idx, per_class, replace=False)))
    return ds.take(np.concatenate(picked))


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    rng = np.random.default_rng(seed)
    labels = ds.labels
    train, test = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_test = int(round(test_fraction * len(idx)))
        if len(idx) >= 2:
            n_test = min(max(n_test, 1), len(idx) - 1)
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    return ds.take(np.sort(np.concatenate(train))), ds.take(np.sort(np.concatenate(test)))


def export_mlxtend_mnist(out_dir: str | Path) -> Path:
    """Write the 5000-digit MNIST sample bundled with ``mlxtend`` as IDX files.

    Used when the full MNIST download is unavailable; 500 digits per class.
    """
    from mlxtend.data import mnist_data

    x, y = mnist_data()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "train-images-idx3-ubyte", out / "train-labels-idx1-ubyte",
              x.reshape(-1, 28, 28).astype(np.uint8), y.astype(np.uint8))
    return out
