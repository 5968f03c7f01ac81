"""Classical image -> amplitude-encoded quantum state.

The pipeline is pixel scaling to [0, 1], block-average pooling down to ``2**n``
cells, and amplitude encoding. Pooling stands in for a learned feature
extractor; any callable with the :data:`Reducer` signature can replace it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateInputError, DimensionError, RangeError, ReductionError
from .qstate import StateVector, make_state


@dataclass(frozen=True, eq=False)
class RawImage:
    height: int
    width: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels).reshape(-1)
        if px.size != self.height * self.width:
            raise DimensionError(f"{px.size} pixels do not fill a {self.height}x{self.width} image")
        if px.size and (px.min() < 0 or px.max() > 255):
            raise RangeError("pixel values must lie in [0, 255]")
        object.__setattr__(self, "pixels", px.astype(np.int64))

    @classmethod
    def from_array(cls, arr) -> "RawImage":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-D image, got shape {arr.shape}")
        return cls(arr.shape[0], arr.shape[1], arr)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Real feature values; ``shape`` keeps the 2-D grid layout when there is one."""

    values: np.ndarray
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", v)
        if self.shape is not None and self.shape[0] * self.shape[1] != v.size:
            raise DimensionError(f"grid {self.shape} does not match {v.size} values")

    @property
    def dim(self) -> int:
        return self.values.size


Reducer = Callable[[FeatureVector, int], FeatureVector]


def normalize_pixels(img: RawImage) -> FeatureVector:
    return FeatureVector(img.pixels / 255.0, (img.height, img.width))


def pooling_grid(target_dim: int) -> tuple[int, int]:
    """Closest-to-square power-of-two grid with ``rows >= cols``, e.g. 128 -> (16, 8)."""
    n = int(target_dim).bit_length() - 1
    if target_dim < 1 or 2**n != target_dim:
        raise DimensionError(f"target dimension {target_dim} is not a power of two")
    return 2 ** ((n + 1) // 2), 2 ** (n // 2)


def _edges(size: int, cells: int) -> np.ndarray:
    return (np.arange(cells + 1) * size) // cells


def block_pool(grid: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Mean of each cell when ``grid[..., h, w]`` is cut into ``rows x cols`` blocks.

    Block borders are ``floor(i * h / rows)``, so blocks differ in size by at most
    one pixel when ``h`` is not a multiple of ``rows``.
    """
    h, w = grid.shape[-2:]
    re, ce = _edges(h, rows), _edges(w, cols)
    sums = np.add.reduceat(np.add.reduceat(grid, re[:-1], axis=-2), ce[:-1], axis=-1)
    counts = np.outer(np.diff(re), np.diff(ce))
    return sums / counts


def fit_grid(h: int, w: int, target_dim: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Pick the block grid for pooling an ``h x w`` image to ``target_dim`` cells.

    Returns ``((h, w), (rows, cols))``. Power-of-two grids are tried from the most
    square outward; a grid that fits no orientation (e.g. 3x3 to 8) pools the
    row-major flattened image as a ``1 x h*w`` strip instead.
    """
    if target_dim > h * w:
        raise ReductionError(f"cannot reduce {h * w} features to {target_dim}")
    rows, _ = pooling_grid(target_dim)
    shapes = []
    while rows <= target_dim:
        shapes += [(rows, target_dim // rows), (target_dim // rows, rows)]
        rows *= 2
    for r, c in shapes:
        if r <= h and c <= w:
            return (h, w), (r, c)
    return (1, h * w), (1, target_dim)


def reduce_features(f: FeatureVector, target_dim: int) -> FeatureVector:
    """Deterministic block-average pooling to ``target_dim`` values (row-major)."""
    if target_dim > f.dim:
        raise ReductionError(f"cannot reduce {f.dim} features to {target_dim}")
    h, w = f.shape if f.shape is not None else (1, f.dim)
    (h, w), (rows, cols) = fit_grid(h, w, target_dim)
    pooled = block_pool(f.values.reshape(h, w), rows, cols)
    return FeatureVector(pooled.reshape(-1), (rows, cols))


def amplitude_encode(f: FeatureVector) -> StateVector:
    n = f.dim.bit_length() - 1
    if 2**n != f.dim or n < 1:
        raise DimensionError(f"feature dimension {f.dim} is not a power of two >= 2")
    if not np.any(f.values):
        raise DegenerateInputError("all-zero feature vector has no amplitude encoding")
    return make_state(n, f.values)


def encode_image(img: RawImage, n_qubits: int, reducer: Reducer = reduce_features) -> StateVector:
    return amplitude_encode(reducer(normalize_pixels(img), 2**n_qubits))


def encode_images(images: np.ndarray, n_qubits: int) -> np.ndarray:
    """Vectorised :func:`encode_image` for a stack ``images[N, h, w]``.

    Returns the amplitude array ``[N, 2**n_qubits]`` (real, unit rows).
    """
    images = np.asarray(images)
    if images.ndim != 3:
        raise DimensionError(f"expected an image stack [N, h, w], got shape {images.shape}")
    target = 2**n_qubits
    h, w = images.shape[1:]
    if target > h * w:
        raise ReductionError(f"cannot reduce {h * w} features to {target}")
    (h, w), (rows, cols) = fit_grid(h, w, target)
    grid = images.reshape(len(images), h, w).astype(np.float64) / 255.0
    feats = block_pool(grid, rows, cols).reshape(len(images), -1)
    norms = np.linalg.norm(feats, axis=1)
    if np.any(norms == 0):
        raise DegenerateInputError(f"images {np.flatnonzero(norms == 0).tolist()} are all zero")
    return feats / norms[:, None]
