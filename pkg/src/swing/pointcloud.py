"""Embedded node sets: the vertex side of an implicitly defined graph.

A point cloud is just an (N, d) array of coordinates. Every vertex of the
implicit graph is identified with one row; edge weights are produced later
by a weight function applied to coordinate differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of N points in R^d.

    Invariants enforced at construction: N >= 1, d >= 1, all coordinates
    finite, single common dimension.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise InvalidInputError(
                f"points must be a 2-d array of shape (N, d), got ndim={pts.ndim}"
            )
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError(f"need N >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point coordinates must all be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


def load_point_cloud(path: str | Path) -> PointCloud:
    """Read a cloud from text: one point per line, whitespace-separated floats.

    Lines starting with '#' and blank lines are ignored. All points must
    share the same dimension.
    """
    rows: list[list[float]] = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values = [float(tok) for tok in line.split()]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: not a float row: {line!r}") from exc
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise InvalidInputError(
                    f"{path}:{lineno}: expected {dim} coordinates, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise InvalidInputError(f"{path}: no points found")
    return PointCloud(np.asarray(rows, dtype=np.float64))


def save_point_cloud(cloud: PointCloud, path: str | Path, header: str | None = None) -> None:
    """Write a cloud in the text format accepted by :func:`load_point_cloud`."""
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for row in cloud.points:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
