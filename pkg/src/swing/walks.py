"""Relaxed walks in the embedding space with linearized transitions.

Instead of hopping between nodes, walkers move through R^d: each step is a
softmax-weighted convex combination of the cloud points, with exponentiated
Gumbel noise factorized into a per-point factor (absorbed into per-step
precomputed matrices A and B) and a per-walker factor (which cancels in
the transition ratio). One step then costs O(d * r) regardless of N, and
the relaxed load update reuses a feature evaluation against a single
precomputed vector C.

Because the walker factor drops out of the softmax ratio, only the
point-factor ratios carry noise, and those hold half of the Gumbel
log-noise. Drawing the factors at shape sigma_sq / 2 therefore makes one
relaxed step match the intended Gumbel-softmax transition at temperature
sigma_sq exactly in distribution ("matched" tempering, the default);
"literal" keeps shape sigma_sq, which corresponds to a softmax over
squared weights at twice the temperature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTransitionError, InvalidInputError
from .features import FeatureSpec, build_feature_map
from .gumbel import sample_point_factors, sample_walker_factors
from .kernels import Modulation
from .pointcloud import PointCloud
from .weights import WeightFunction

_DEN_FLOOR = 1e-300
_WALKER_BATCH = 8192
_WALK_BLOCK = 16


@dataclass(frozen=True)
class SwingConfig:
    """Everything a relaxed-walk run needs besides the cloud itself.

    ``g`` is the deposit generator (defaults to the edge generator f);
    its tempered width is a bias/variance knob: spreading each deposit
    over nearby vertices smooths sparse-walk noise at the cost of
    smearing. ``load_temperature`` fixes the generator power used for the
    degree estimate; 1.0 means the load tracks the degree of the graph
    the walk actually moves on regardless of the softmax temperature, and
    coincides with the single-map formulation whenever sigma_sq == 1.
    """

    f: WeightFunction
    p_halt: float
    m: int = 1
    seed: int = 0
    sigma_sq: float = 1.0
    phi: FeatureSpec = field(default_factory=FeatureSpec)
    psi: FeatureSpec = field(default_factory=FeatureSpec)
    g: WeightFunction | None = None
    length_mode: str = "fixed"            # "fixed" | "per-walk"
    max_steps: int = 10_000
    point_factors_per_walk: bool = False
    factor_tempering: str = "matched"     # "matched" | "literal"
    load_temperature: float = 1.0
    load_spec: FeatureSpec | None = None  # None: reuse the phi spec

    def __post_init__(self):
        if not 0.0 < self.p_halt < 1.0:
            raise InvalidInputError(f"p_halt must lie in (0, 1), got {self.p_halt}")
        if self.m < 1:
            raise InvalidInputError(f"need at least one walk per node, got m={self.m}")
        if not self.sigma_sq > 0:
            raise InvalidInputError(f"sigma_sq must be positive, got {self.sigma_sq}")
        if self.length_mode not in ("fixed", "per-walk"):
            raise InvalidInputError(f"unknown length mode {self.length_mode!r}")
        if self.factor_tempering not in ("matched", "literal"):
            raise InvalidInputError(f"unknown factor tempering {self.factor_tempering!r}")
        if not self.load_temperature > 0:
            raise InvalidInputError(
                f"load_temperature must be positive, got {self.load_temperature}"
            )

    @property
    def deposit_f(self) -> WeightFunction:
        return self.g if self.g is not None else self.f

    @property
    def factor_shape(self) -> float:
        return self.sigma_sq / 2.0 if self.factor_tempering == "matched" else self.sigma_sq


@dataclass(frozen=True)
class StepPrecompute:
    """A = sum_j p_j a_j phi(p_j)^T (d x r) and B = sum_j a_j phi(p_j)^T (r,)."""

    a_matrix: np.ndarray
    b_vector: np.ndarray
    t: int


@dataclass(frozen=True)
class LoadPrecompute:
    """C = sum_i phi(p_i)^T, the feature-space image of the whole cloud."""

    c_vector: np.ndarray


def build_step_precomputes(
    cloud: PointCloud,
    phi_map,
    n_steps: int,
    seed_or_rng,
    factor_shape: float = 1.0,
) -> tuple[list[StepPrecompute], LoadPrecompute]:
    """Per-step transition precomputes plus the load vector C.

    Point factors are drawn fresh for every step index; A and B do not
    depend on walker state, so the whole list costs O(N * n_steps * r)
    once and each transition afterwards is O(d * r).
    """
    if n_steps < 0:
        raise InvalidInputError(f"n_steps must be nonnegative, got {n_steps}")
    rng = (
        seed_or_rng
        if isinstance(seed_or_rng, np.random.Generator)
        else np.random.default_rng(seed_or_rng)
    )
    phi_cloud = phi_map.features(cloud.points, side=1)      # (N, r)
    c_vector = phi_cloud.sum(axis=0)
    pres = []
    for t in range(n_steps):
        a = sample_point_factors(rng, factor_shape, size=cloud.n)
        weighted = a[:, None] * phi_cloud
        pres.append(
            StepPrecompute(
                a_matrix=cloud.points.T @ weighted,
                b_vector=a @ phi_cloud,
                t=t,
            )
        )
    return pres, LoadPrecompute(c_vector=c_vector)


def linearized_transition(pre: StepPrecompute, phi_x: np.ndarray, b: float) -> np.ndarray:
    """Next location (A phi(x) b) / (B phi(x) b), O(d * r).

    The positive walker factor b cancels exactly in the ratio, so the
    output is computed in the cancelled form and is bit-invariant to
    rescaling b; b still enters the degeneracy check, which guards the
    mathematical denominator.
    """
    phi_x = np.asarray(phi_x, dtype=np.float64)
    den = float(pre.b_vector @ phi_x)
    if abs(den) * b < _DEN_FLOOR:
        raise DegenerateTransitionError(
            f"transition denominator {den * b:.3e} below {_DEN_FLOOR} at step {pre.t}",
            step=pre.t,
            magnitude=abs(den) * b,
        )
    return (pre.a_matrix @ phi_x) / den


def relaxed_load_update(
    load: float, load_pre: LoadPrecompute, phi_x: np.ndarray, p_halt: float
) -> float:
    """load * (C . phi(x)) / (1 - p_halt); C . phi(x) estimates the degree."""
    if not np.isfinite(load):
        raise InvalidInputError(f"load must be finite, got {load}")
    return load * float(load_pre.c_vector @ np.asarray(phi_x, dtype=np.float64)) / (1.0 - p_halt)


@dataclass
class Trajectories:
    """Relaxed-walk states for one ensemble, stored as ragged runs.

    Walker k occupies rows offsets[k]..offsets[k+1]-1 of the flat arrays,
    one row per step t = 0..lengths[k] holding its location x^t and load
    l^t. Walkers are ordered walk-major: walker w*N + i starts at node i
    and belongs to walk w of m.
    """

    cloud: PointCloud
    flat_locations: np.ndarray    # (S, d)
    flat_loads: np.ndarray        # (S,)
    flat_steps: np.ndarray        # (S,) step index t per row
    offsets: np.ndarray           # (n_walkers + 1,)
    start_nodes: np.ndarray       # (n_walkers,)
    lengths: np.ndarray           # (n_walkers,)
    m: int
    negative_degree_steps: int = 0

    @property
    def n_walkers(self) -> int:
        return self.start_nodes.shape[0]

    @property
    def n_steps(self) -> int:
        return int(self.lengths.max()) if self.lengths.size else 0

    @property
    def row_walkers(self) -> np.ndarray:
        """Walker index owning each flat row."""
        return np.repeat(np.arange(self.n_walkers), np.diff(self.offsets))

    def location(self, walker: int, t: int) -> np.ndarray:
        if not 0 <= t <= self.lengths[walker]:
            raise InvalidInputError(f"walker {walker} has no step {t}")
        return self.flat_locations[self.offsets[walker] + t]

    def load(self, walker: int, t: int) -> float:
        if not 0 <= t <= self.lengths[walker]:
            raise InvalidInputError(f"walker {walker} has no step {t}")
        return float(self.flat_loads[self.offsets[walker] + t])

    def deposits(self, rho) -> np.ndarray:
        """u^t = l^t * rho(t) per flat row."""
        values = rho.values if isinstance(rho, Modulation) else np.asarray(rho, dtype=np.float64)
        t_hi = self.n_steps
        if len(values) < t_hi + 1:
            raise InvalidInputError(
                f"modulation covers {len(values)} steps but trajectories need {t_hi + 1}"
            )
        return self.flat_loads * values[self.flat_steps]


def _draw_length(rng: np.random.Generator, p_halt: float, size=None):
    # geometric number of survived termination draws: support {0, 1, ...},
    # mean (1 - p_halt) / p_halt
    return rng.geometric(p_halt, size=size) - 1


def run_swing_walks(cloud: PointCloud, cfg: SwingConfig, ensemble: int = 0) -> Trajectories:
    """Evolve m relaxed walks from every cloud point.

    The walk length is drawn once per ensemble in fixed mode (all walks
    share it) or per walk otherwise. Each step draws fresh per-walker
    factors, evaluates the transition features once, and reuses them for
    the load update when the load map coincides with the transition map.
    Negative degree estimates (possible with complex Fourier features at
    small r) are counted and passed through.
    """
    if ensemble < 0:
        raise InvalidInputError(f"ensemble index must be nonnegative, got {ensemble}")
    children = np.random.SeedSequence(cfg.seed).spawn(max(3, ensemble + 1))
    map_rng, len_rng, a_rng, b_rng = (
        np.random.default_rng(s) for s in children[ensemble].spawn(4)
    )

    n, d = cloud.n, cloud.dim
    n_walkers = n * cfg.m
    if cfg.length_mode == "fixed":
        t_all = int(min(_draw_length(len_rng, cfg.p_halt), cfg.max_steps))
        lengths = np.full(n_walkers, t_all, dtype=np.int64)
    else:
        lengths = np.minimum(
            _draw_length(len_rng, cfg.p_halt, size=n_walkers), cfg.max_steps
        ).astype(np.int64)
    t_max = int(lengths.max())

    phi_map = build_feature_map(cfg.f, cfg.sigma_sq, cfg.phi, cloud, map_rng)
    if cfg.load_temperature == cfg.sigma_sq and cfg.load_spec is None:
        load_map = phi_map
    else:
        load_map = build_feature_map(
            cfg.f, cfg.load_temperature, cfg.load_spec or cfg.phi, cloud, map_rng
        )
    load_c = LoadPrecompute(c_vector=load_map.features(cloud.points, side=1).sum(axis=0))

    phi_cloud = phi_map.features(cloud.points, side=1)
    points = cloud.points

    # ragged storage: walker k owns rows offsets[k] .. offsets[k+1]-1
    offsets = np.zeros(n_walkers + 1, dtype=np.int64)
    np.cumsum(lengths + 1, out=offsets[1:])
    total = int(offsets[-1])
    flat_locations = np.empty((total, d))
    flat_loads = np.empty(total)
    flat_steps = np.empty(total, dtype=np.int64)

    start_nodes = np.tile(np.arange(n, dtype=np.int64), cfg.m)
    x = points[start_nodes].copy()
    load = np.ones(n_walkers)
    row0 = offsets[:-1]
    flat_locations[row0] = x
    flat_loads[row0] = 1.0
    flat_steps[row0] = 0

    if not cfg.point_factors_per_walk:
        pres, _ = build_step_precomputes(cloud, phi_map, t_max, a_rng, cfg.factor_shape)

    negative_degree = 0
    walk_len_max = lengths.reshape(cfg.m, n).max(axis=1) if n_walkers else np.zeros(0)

    for t in range(t_max):
        active = np.flatnonzero(lengths > t)
        if active.size == 0:
            break
        # full-population draws keep the stream layout independent of
        # which walkers happen to be alive
        b = sample_walker_factors(b_rng, cfg.factor_shape, size=n_walkers)
        if cfg.point_factors_per_walk:
            a_t = sample_point_factors(a_rng, cfg.factor_shape, size=(cfg.m, n))
            live_walks = np.flatnonzero(walk_len_max > t)
            for lo in range(0, live_walks.size, _WALK_BLOCK):
                wblk = live_walks[lo : lo + _WALK_BLOCK]
                a_blk = a_t[wblk]                                  # (B, N)
                weighted = a_blk[:, :, None] * phi_cloud[None]     # (B, N, r)
                a_mats = np.matmul(points.T[None], weighted)       # (B, d, r)
                b_vecs = a_blk @ phi_cloud                         # (B, r)
                for j, w in enumerate(wblk):
                    blk = np.arange(w * n, (w + 1) * n)
                    act = blk[lengths[blk] > t]
                    if act.size == 0:
                        continue
                    negative_degree += _advance(
                        x, load, act, phi_map, load_map, load_c,
                        a_mats[j], b_vecs[j], b, t, cfg.p_halt,
                    )
        else:
            pre = pres[t]
            for lo in range(0, active.size, _WALKER_BATCH):
                act = active[lo : lo + _WALKER_BATCH]
                negative_degree += _advance(
                    x, load, act, phi_map, load_map, load_c,
                    pre.a_matrix, pre.b_vector, b, t, cfg.p_halt,
                )
        rows = offsets[active] + (t + 1)
        flat_locations[rows] = x[active]
        flat_loads[rows] = load[active]
        flat_steps[rows] = t + 1

    return Trajectories(
        cloud=cloud,
        flat_locations=flat_locations,
        flat_loads=flat_loads,
        flat_steps=flat_steps,
        offsets=offsets,
        start_nodes=start_nodes,
        lengths=lengths,
        m=cfg.m,
        negative_degree_steps=negative_degree,
    )


def _advance(x, load, act, phi_map, load_map, load_c, a_mat, b_vec, b, t, p_halt) -> int:
    """One linearized step plus load update for the walkers in ``act``."""
    phi_x = phi_map.features(x[act], side=2)
    num = phi_x @ a_mat.T
    den = phi_x @ b_vec
    bad = np.abs(den) * b[act] < _DEN_FLOOR
    if bad.any():
        k = int(np.argmax(bad))
        raise DegenerateTransitionError(
            f"transition denominator {den[k] * b[act][k]:.3e} below {_DEN_FLOOR} "
            f"at step {t}, walker {int(act[k])}",
            step=t,
            magnitude=float(np.abs(den[k]) * b[act][k]),
        )
    degree_est = (
        phi_x @ load_c.c_vector
        if load_map is phi_map
        else load_map.features(x[act], side=2) @ load_c.c_vector
    )
    load[act] = load[act] * degree_est / (1.0 - p_halt)
    x[act] = num / den[:, None]
    return int((degree_est < 0).sum())
