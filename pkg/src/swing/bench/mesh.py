"""Triangle meshes: OFF parsing, vertex normals, synthetic test meshes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from ..errors import InvalidInputError, MeshParseError
from ..pointcloud import PointCloud


@dataclass
class Mesh:
    """Triangle mesh with optional unit vertex normals."""

    vertices: PointCloud
    faces: np.ndarray                 # (F, 3) int indices
    normals: np.ndarray | None = None  # (N, 3) unit vectors

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise InvalidInputError(f"faces must be (F, 3) index triples, got {faces.shape}")
        if faces.size and (faces.min() < 0 or faces.max() >= self.vertices.n):
            raise InvalidInputError("face indices out of vertex range")
        self.faces = faces
        if self.normals is not None:
            normals = np.asarray(self.normals, dtype=np.float64)
            if normals.shape != (self.vertices.n, 3):
                raise InvalidInputError("need one normal per vertex")
            lengths = np.linalg.norm(normals, axis=1)
            if np.any(np.abs(lengths - 1.0) > 1e-6):
                raise InvalidInputError("vertex normals must be unit length within 1e-6")
            self.normals = normals

    @property
    def n_vertices(self) -> int:
        return self.vertices.n

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]


def compute_vertex_normals(mesh: Mesh) -> np.ndarray:
    """Area-weighted average of incident face normals, normalized per vertex.

    The raw cross product of two triangle edges has twice the face area as
    its length, so accumulating raw cross products performs the area
    weighting implicitly.
    """
    pts = mesh.vertices.points
    v0 = pts[mesh.faces[:, 0]]
    cross = np.cross(pts[mesh.faces[:, 1]] - v0, pts[mesh.faces[:, 2]] - v0)
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], cross)
    lengths = np.linalg.norm(acc, axis=1)
    if np.any(lengths == 0):
        bad = int(np.flatnonzero(lengths == 0)[0])
        raise InvalidInputError(
            f"vertex {bad} has no incident face area; cannot orient a normal"
        )
    return acc / lengths[:, None]


def load_mesh_off(path: str | Path) -> Mesh:
    """Parse an OFF file into a mesh; faces must be triangles."""
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        raw_lines = fh.readlines()

    def tokens():
        for lineno, line in enumerate(raw_lines, start=1):
            body = line.split("#", 1)[0].strip()
            if body:
                yield lineno, body

    stream = tokens()

    def next_line(what: str):
        try:
            return next(stream)
        except StopIteration:
            raise MeshParseError(f"{path}: unexpected end of file while reading {what}",
                                 line_number=len(raw_lines)) from None

    lineno, header = next_line("header")
    counts_part = None
    if header == "OFF":
        pass
    elif header.startswith("OFF"):
        counts_part = (lineno, header[3:].strip())
    else:
        raise MeshParseError(f"{path}:{lineno}: expected OFF header, got {header!r}",
                             line_number=lineno)
    if counts_part is None:
        counts_part = next_line("vertex/face counts")
    lineno, counts = counts_part
    parts = counts.split()
    if len(parts) < 2:
        raise MeshParseError(f"{path}:{lineno}: expected 'n_vertices n_faces [n_edges]'",
                             line_number=lineno)
    try:
        n_v, n_f = int(parts[0]), int(parts[1])
    except ValueError:
        raise MeshParseError(f"{path}:{lineno}: counts must be integers", line_number=lineno)

    verts = np.empty((n_v, 3))
    for i in range(n_v):
        lineno, line = next_line(f"vertex {i}")
        toks = line.split()
        if len(toks) < 3:
            raise MeshParseError(f"{path}:{lineno}: vertex needs 3 coordinates",
                                 line_number=lineno)
        try:
            verts[i] = [float(t) for t in toks[:3]]
        except ValueError:
            raise MeshParseError(f"{path}:{lineno}: bad vertex coordinate", line_number=lineno)

    faces = np.empty((n_f, 3), dtype=np.int64)
    for i in range(n_f):
        lineno, line = next_line(f"face {i}")
        toks = line.split()
        try:
            k = int(toks[0])
        except (ValueError, IndexError):
            raise MeshParseError(f"{path}:{lineno}: face line must start with a vertex count",
                                 line_number=lineno)
        if k != 3:
            raise MeshParseError(f"{path}:{lineno}: only triangles supported, got {k}-gon",
                                 line_number=lineno)
        if len(toks) < 4:
            raise MeshParseError(f"{path}:{lineno}: triangle needs 3 indices",
                                 line_number=lineno)
        try:
            faces[i] = [int(t) for t in toks[1:4]]
        except ValueError:
            raise MeshParseError(f"{path}:{lineno}: bad face index", line_number=lineno)
    try:
        return Mesh(vertices=PointCloud(verts), faces=faces)
    except InvalidInputError as exc:
        raise MeshParseError(f"{path}: {exc}", line_number=None) from exc


def save_mesh_off(mesh: Mesh, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        for v in mesh.vertices.points:
            fh.write(f"{v[0]!r} {v[1]!r} {v[2]!r}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def make_sphere_mesh(n: int, radius: float = 3.0, seed: int = 0) -> Mesh:
    """Near-uniform sphere triangulation via a jittered Fibonacci lattice.

    Faces come from the convex hull, oriented outward; vertex normals are
    the area-weighted face averages (within a few degrees of radial).
    """
    if n < 4:
        raise InvalidInputError(f"need at least 4 vertices for a sphere mesh, got {n}")
    rng = np.random.default_rng(seed)
    idx = np.arange(n, dtype=np.float64)
    golden = (1.0 + 5.0**0.5) / 2.0
    theta = 2.0 * np.pi * idx / golden
    z = 1.0 - 2.0 * (idx + 0.5) / n
    z = np.clip(z + rng.normal(0, 0.1 / n, n), -1.0, 1.0)
    rho = np.sqrt(1.0 - z * z)
    pts = radius * np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])
    hull = ConvexHull(pts)
    faces = hull.simplices.copy()
    centroid = pts.mean(axis=0)
    v0 = pts[faces[:, 0]]
    outward = np.einsum(
        "ij,ij->i",
        np.cross(pts[faces[:, 1]] - v0, pts[faces[:, 2]] - v0),
        v0 - centroid,
    )
    flip = outward < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    mesh = Mesh(vertices=PointCloud(pts), faces=faces)
    mesh.normals = compute_vertex_normals(mesh)
    return mesh


def make_flat_patch_mesh(side: int = 8, spacing: float = 1.0) -> Mesh:
    """Planar grid patch; every vertex normal is +z exactly."""
    if side < 2:
        raise InvalidInputError(f"need a grid of at least 2x2 vertices, got side={side}")
    xs = np.arange(side) * spacing
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(side * side)])
    faces = []
    for i in range(side - 1):
        for j in range(side - 1):
            a = i * side + j
            b = a + 1
            c = a + side
            d = c + 1
            faces.append([a, c, b])
            faces.append([b, c, d])
    mesh = Mesh(vertices=PointCloud(pts), faces=np.asarray(faces, dtype=np.int64))
    mesh.normals = compute_vertex_normals(mesh)
    return mesh
