"""Baseline graph random features on an explicitly materialized graph.

Walkers start at every node, move to neighbours with probability
proportional to edge weight, and deposit a load modulated by rho(t) at
every visited node before each transition. The load is multiplied by
deg(current) / (1 - p_halt) per step, which exactly compensates both the
survival probability and the transition normalization, so the outer
product of two independent signature ensembles is an unbiased estimate of
the kernel matrix. Cost is O(N) per step; that quadratic total is the
price the continuous relaxation removes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .kernels import Modulation

_ROW_BATCH = 2048


@dataclass(frozen=True)
class WalkConfig:
    """Termination probability, walks per node, safety cap and seed."""

    p_halt: float
    m: int = 1
    max_steps: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p_halt < 1.0:
            raise InvalidInputError(f"p_halt must lie in (0, 1), got {self.p_halt}")
        if self.m < 1:
            raise InvalidInputError(f"need at least one walk per node, got m={self.m}")
        if self.max_steps < 1:
            raise InvalidInputError(f"max_steps must be positive, got {self.max_steps}")


@dataclass(frozen=True)
class SignatureMatrix:
    """Row-stacked signature vectors from one walk ensemble."""

    values: np.ndarray          # (N, N), row i is the vector for start node i
    ensemble: str               # "first" | "second"
    truncated_walks: int = 0


def _check_graph(w: np.ndarray, deg: np.ndarray):
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInputError(f"W must be square, got shape {w.shape}")
    if np.any(w < 0):
        raise InvalidInputError("edge weights must be nonnegative")
    deg = np.asarray(deg, dtype=np.float64)
    if deg.shape != (w.shape[0],):
        raise InvalidInputError("deg must have one entry per node")
    return w, deg


def _rho_values(rho) -> np.ndarray:
    if isinstance(rho, Modulation):
        return rho.values
    return np.asarray(rho, dtype=np.float64)


def _run_ensemble(
    w: np.ndarray,
    deg: np.ndarray,
    rho: np.ndarray,
    cfg: WalkConfig,
    rng: np.random.Generator,
    start_nodes: np.ndarray,
    per_walk: bool = False,
    collect_lengths: bool = False,
):
    """Vectorized walk ensemble; deposits accumulate deterministically.

    Returns (xi, truncated, lengths) where xi is (N, N) averaged over the
    m walks, or (m, N, N) of raw per-walk vectors when ``per_walk``.
    """
    n = w.shape[0]
    n_walkers = start_nodes.size * cfg.m
    start = np.repeat(start_nodes, cfg.m)
    walk_idx = np.tile(np.arange(cfg.m), start_nodes.size)
    if per_walk:
        xi = np.zeros((cfg.m, n, n))
    else:
        xi = np.zeros((n, n))
    current = start.copy()
    load = np.ones(n_walkers)
    length = np.zeros(n_walkers, dtype=np.int64)
    lengths_out = np.zeros(n_walkers, dtype=np.int64) if collect_lengths else None
    alive = np.arange(n_walkers)
    truncated = 0

    while alive.size:
        t_now = length[alive]
        if int(t_now.max()) >= len(rho):
            raise InvalidInputError(
                f"walk reached step {int(t_now.max())} but the modulation only covers "
                f"{len(rho)} steps; deconvolve a longer modulation"
            )
        dep = load[alive] * rho[t_now]
        if per_walk:
            np.add.at(xi, (walk_idx[alive], start[alive], current[alive]), dep)
        else:
            np.add.at(xi, (start[alive], current[alive]), dep)

        # draw the step's randomness up front so results do not depend on
        # the row-batch size used below
        u_step = rng.random(alive.size)
        u_halt = rng.random(alive.size)

        nxt = np.empty(alive.size, dtype=np.int64)
        tot = np.empty(alive.size)
        for lo in range(0, alive.size, _ROW_BATCH):
            sl = slice(lo, min(lo + _ROW_BATCH, alive.size))
            rows = w[current[alive[sl]]]
            cdf = np.cumsum(rows, axis=1)
            tot[sl] = cdf[:, -1]
            uu = u_step[sl] * tot[sl]
            nxt[sl] = np.minimum(np.sum(cdf < uu[:, None], axis=1), n - 1)

        zero_deg = tot <= 0.0
        load[alive] *= deg[current[alive]] / (1.0 - cfg.p_halt)
        current[alive] = np.where(zero_deg, current[alive], nxt)
        length[alive] += 1

        die = (u_halt < cfg.p_halt) | zero_deg
        trunc = ~die & (length[alive] >= cfg.max_steps)
        truncated += int(trunc.sum())
        die |= trunc
        if collect_lengths:
            lengths_out[alive[die]] = length[alive[die]] - 1
        alive = alive[~die]

    if not per_walk:
        xi /= cfg.m
    return xi, truncated, lengths_out


def sample_signature_vector(
    w: np.ndarray, deg: np.ndarray, rho, cfg: WalkConfig, i: int
) -> np.ndarray:
    """Signature vector xi_rho(i): averaged deposits of m walks from node i."""
    w, deg = _check_graph(w, deg)
    if not 0 <= i < w.shape[0]:
        raise InvalidInputError(f"node index {i} out of range for N={w.shape[0]}")
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, i)))
    xi, _, _ = _run_ensemble(
        w, deg, _rho_values(rho), cfg, rng, np.asarray([i], dtype=np.int64)
    )
    return xi[i]


def sample_signature_matrix(
    w: np.ndarray, deg: np.ndarray, rho, cfg: WalkConfig, ensemble: int = 0
) -> SignatureMatrix:
    """Signature vectors for every start node, one walk ensemble."""
    w, deg = _check_graph(w, deg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[ensemble])
    xi, truncated, _ = _run_ensemble(
        w, deg, _rho_values(rho), cfg, rng, np.arange(w.shape[0], dtype=np.int64)
    )
    return SignatureMatrix(
        values=xi, ensemble="first" if ensemble == 0 else "second", truncated_walks=truncated
    )


def signature_samples(
    w: np.ndarray, deg: np.ndarray, rho, cfg: WalkConfig, ensemble: int = 0
) -> np.ndarray:
    """Per-walk signature matrices, shape (m, N, N), not averaged.

    Pairing walk j of two independent ensembles gives m independent
    repetitions of the m=1 estimator; useful for convergence studies.
    """
    w, deg = _check_graph(w, deg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[ensemble])
    xi, _, _ = _run_ensemble(
        w, deg, _rho_values(rho), cfg, rng,
        np.arange(w.shape[0], dtype=np.int64), per_walk=True,
    )
    return xi


def sample_walk_lengths(
    w: np.ndarray, deg: np.ndarray, cfg: WalkConfig
) -> np.ndarray:
    """Observed walk lengths (termination draws survived) for one ensemble."""
    w, deg = _check_graph(w, deg)
    rho = np.zeros(max(cfg.max_steps + 1, 2))
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[0])
    _, _, lengths = _run_ensemble(
        w, deg, rho, cfg, rng, np.arange(w.shape[0], dtype=np.int64),
        collect_lengths=True,
    )
    return lengths


def grf_factorize(
    w: np.ndarray, deg: np.ndarray, rho, cfg: WalkConfig
) -> tuple[SignatureMatrix, SignatureMatrix]:
    """Two independent signature ensembles whose product estimates the kernel."""
    k1 = sample_signature_matrix(w, deg, rho, cfg, ensemble=0)
    k2 = sample_signature_matrix(w, deg, rho, cfg, ensemble=1)
    return k1, k2


def grf_matvec(k1, k2, v: np.ndarray) -> np.ndarray:
    """Approximate kernel action K1 (K2^T v); never materializes K1 K2^T."""
    m1 = k1.values if isinstance(k1, SignatureMatrix) else np.asarray(k1, dtype=np.float64)
    m2 = k2.values if isinstance(k2, SignatureMatrix) else np.asarray(k2, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if m1.shape != m2.shape or m1.shape[1] != v.shape[0]:
        raise InvalidInputError(
            f"shape mismatch: K1 {m1.shape}, K2 {m2.shape}, v {v.shape}"
        )
    return m1 @ (m2.T @ v)
