"""Edge-weight generators and the dense materialization oracle.

Weights of the implicit graph are w[i, j] = f(p_i - p_j) for a symmetric
bivariate generator f. Materializing the full N x N matrix is O(N^2) and
exists here only as a test/benchmark oracle; the production path never
builds it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidInputError
from .pointcloud import PointCloud

#: Largest N the dense oracle will materialize by default.
DEFAULT_ORACLE_CAP = 20_000

_BLOCK_ROWS = 256


@dataclass(frozen=True)
class GaussianRBF:
    """f(z) = exp(-||z||^2 / (2 * bandwidth^2)), values in (0, 1]."""

    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InvalidInputError(f"bandwidth must be positive, got {self.bandwidth}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        sq = np.sum(z * z, axis=-1)
        return np.exp(-sq / (2.0 * self.bandwidth**2))


@dataclass(frozen=True)
class StepL1:
    """f(z) = 1 if ||z||_1 <= epsilon else 0."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        return (np.sum(np.abs(z), axis=-1) <= self.epsilon).astype(np.float64)


@dataclass(frozen=True)
class StepL2:
    """f(z) = 1 if ||z||_2 <= epsilon else 0."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        return (np.sqrt(np.sum(z * z, axis=-1)) <= self.epsilon).astype(np.float64)


WeightFunction = Union[GaussianRBF, StepL1, StepL2]


def materialize_weights(
    cloud: PointCloud,
    f: WeightFunction,
    include_diagonal: bool = False,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
) -> np.ndarray:
    """Dense weight matrix W[i, j] = f(p_i - p_j) (test/benchmark oracle).

    Self-weights are zeroed unless ``include_diagonal`` is set; the
    continuous relaxation implicitly keeps the i = j term, so comparisons
    against it must pass ``include_diagonal=True`` on this side too.
    """
    n = cloud.n
    if n > oracle_cap:
        raise InvalidInputError(f"N={n} exceeds the dense-oracle cap {oracle_cap}")
    pts = cloud.points
    out = np.empty((n, n), dtype=np.float64)
    for lo in range(0, n, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n)
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        out[lo:hi] = f(diff)
    if not include_diagonal:
        np.fill_diagonal(out, 0.0)
    return out


def weighted_degrees(w: np.ndarray) -> np.ndarray:
    """Row sums deg(i) = sum_j W[i, j]."""
    return np.asarray(w, dtype=np.float64).sum(axis=1)


def degree_normalized(w: np.ndarray) -> np.ndarray:
    """Symmetric degree renormalization D^{-1/2} W D^{-1/2}.

    Optional preprocessing for the dense oracle path only; zero-degree rows
    are left untouched.
    """
    w = np.asarray(w, dtype=np.float64)
    deg = w.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    return w * inv_sqrt[:, None] * inv_sqrt[None, :]
