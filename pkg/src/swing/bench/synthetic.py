"""Synthetic point-cloud generator with size-independent local density.

Coordinates are iid uniform on a cube whose half-width grows like
(pi N / 6)^(1/3), so the mean density stays 3 / (4 pi) and a unit ball
around an interior point contains about one other point on average.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..pointcloud import PointCloud


def cube_half_width(n: int) -> float:
    return float((np.pi * n / 6.0) ** (1.0 / 3.0))


def gen_synthetic_cloud(n: int, seed: int = 0) -> PointCloud:
    """N points iid uniform on [-h, h]^3 with h = (pi N / 6)^(1/3)."""
    if n < 1:
        raise InvalidInputError(f"need at least one point, got {n}")
    rng = np.random.default_rng(seed)
    h = cube_half_width(n)
    return PointCloud(rng.uniform(-h, h, size=(n, 3)))
