"""Kernel-matrix actions from relaxed-walk trajectories.

Each walker step deposits u^t spread over all vertices with weights
psi(x^t)^T psi(p_k) / (psi(x^t)^T C), C = sum_k psi(p_k). The signature
vectors are therefore dense, but they are never stored: every walker step
contributes the r-vector u^t * psi(x^t) / (psi(x^t)^T C), and summing
those per start node gives an (N x r) aggregate whose products with the
cloud feature matrix realize K1 w and K2^T v in time linear in N.

The t = 0 deposit is special: the walker still sits exactly on its start
node, whose identity is known, so its deposit u^0 = rho(0) goes to that
node directly instead of through the feature spread. The spread sums
therefore run over t >= 1, which keeps the kernel's leading identity
component exact, mirroring the discrete walker's first deposit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .features import build_feature_map
from .kernels import Modulation
from .pointcloud import PointCloud
from .walks import SwingConfig, Trajectories, run_swing_walks

_DEN_FLOOR = 1e-300
_AGG_BATCH = 2048


def _rho_values(rho) -> np.ndarray:
    if isinstance(rho, Modulation):
        return rho.values
    return np.asarray(rho, dtype=np.float64)


def psi_map_for(cloud: PointCloud, cfg: SwingConfig):
    """Deposit-side feature map, shared by both ensembles of a run."""
    stream = np.random.SeedSequence(cfg.seed).spawn(3)[2]
    return build_feature_map(
        cfg.deposit_f, cfg.sigma_sq, cfg.psi, cloud, np.random.default_rng(stream)
    )


@dataclass(frozen=True)
class DepositAggregate:
    """Per-node sums q_i = (1/m) sum_{w,t>=1} u^t psi(x^t) / (psi(x^t) . C_psi)."""

    q: np.ndarray              # (N, r_psi)
    skipped_steps: int         # walker steps with a degenerate normalizer


def aggregate_deposits(
    traj: Trajectories, psi_map, rho, psi_cloud: np.ndarray | None = None
) -> DepositAggregate:
    """Fold a trajectory set into its (N x r_psi) action aggregate.

    Covers the spread deposits (t >= 1); the exact t = 0 term is added by
    the matvec routines. Steps whose normalizer psi(x^t) . C_psi vanishes
    are skipped and counted rather than poisoning the sums.
    """
    cloud = traj.cloud
    if psi_cloud is None:
        psi_cloud = psi_map.features(cloud.points, side=1)
    c_psi = psi_cloud.sum(axis=0)
    q = np.zeros((cloud.n, psi_map.feature_dim))
    rows = np.flatnonzero(traj.flat_steps >= 1)
    if rows.size == 0:
        return DepositAggregate(q=q, skipped_steps=0)
    deposits = traj.deposits(rho)[rows]
    row_nodes = traj.start_nodes[traj.row_walkers[rows]]
    skipped = 0
    for lo in range(0, rows.size, _AGG_BATCH):
        sl = slice(lo, min(lo + _AGG_BATCH, rows.size))
        psi_x = psi_map.features(traj.flat_locations[rows[sl]], side=2)
        den = psi_x @ c_psi
        bad = np.abs(den) < _DEN_FLOOR
        skipped += int((bad & (deposits[sl] != 0.0)).sum())
        wgt = np.where(bad, 0.0, deposits[sl] / np.where(bad, 1.0, den))
        np.add.at(q, row_nodes[sl], wgt[:, None] * psi_x)
    q /= traj.m
    return DepositAggregate(q=q, skipped_steps=skipped)


def matvec_k1(traj: Trajectories, psi_map, rho, w: np.ndarray) -> np.ndarray:
    """Entry i of K1 w: rho(0) w_i plus the spread deposits against S_w."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[0] != traj.cloud.n:
        raise InvalidInputError(f"vector length {w.shape[0]} != N {traj.cloud.n}")
    rho0 = float(_rho_values(rho)[0])
    psi_cloud = psi_map.features(traj.cloud.points, side=1)
    agg = aggregate_deposits(traj, psi_map, rho, psi_cloud)
    return rho0 * w + agg.q @ (psi_cloud.T @ w)


def matvec_k2t(traj: Trajectories, psi_map, rho, v: np.ndarray) -> np.ndarray:
    """Entry k of K2^T v: rho(0) v_k plus the v-weighted aggregate at psi(p_k)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != traj.cloud.n:
        raise InvalidInputError(f"vector length {v.shape[0]} != N {traj.cloud.n}")
    rho0 = float(_rho_values(rho)[0])
    psi_cloud = psi_map.features(traj.cloud.points, side=1)
    agg = aggregate_deposits(traj, psi_map, rho, psi_cloud)
    return rho0 * v + psi_cloud @ (agg.q.T @ v)


def swing_matvec(
    traj1: Trajectories, traj2: Trajectories, psi_map, rho, v: np.ndarray
) -> np.ndarray:
    """Approximate kernel action K1 (K2^T v) from two independent ensembles."""
    return matvec_k1(traj1, psi_map, rho, matvec_k2t(traj2, psi_map, rho, v))


class KernelAction:
    """Cached form of the factorized action for repeated products.

    Builds both deposit aggregates once; matvec cost per vector is then
    O(N * r_psi). ``dense`` materializes the full estimate for error
    measurement; its columns equal the action on basis vectors up to
    floating-point associativity.
    """

    def __init__(self, traj1: Trajectories, traj2: Trajectories, psi_map, rho):
        if traj1.cloud.n != traj2.cloud.n:
            raise InvalidInputError("the two ensembles must share a cloud")
        self.psi_map = psi_map
        self.rho0 = float(_rho_values(rho)[0])
        self.psi_cloud = psi_map.features(traj1.cloud.points, side=1)
        agg1 = aggregate_deposits(traj1, psi_map, rho, self.psi_cloud)
        agg2 = aggregate_deposits(traj2, psi_map, rho, self.psi_cloud)
        self.q1 = agg1.q
        self.q2 = agg2.q
        self.skipped_steps = (agg1.skipped_steps, agg2.skipped_steps)

    @property
    def n(self) -> int:
        return self.q1.shape[0]

    def matvec_k2t(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return self.rho0 * v + self.psi_cloud @ (self.q2.T @ v)

    def matvec_k1(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        return self.rho0 * w + self.q1 @ (self.psi_cloud.T @ w)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matvec_k1(self.matvec_k2t(v))

    def dense(self) -> np.ndarray:
        gram = self.psi_cloud.T @ self.psi_cloud          # (r_psi, r_psi)
        out = (self.q1 @ gram) @ self.q2.T
        out += self.rho0 * (self.q1 @ self.psi_cloud.T)
        out += self.rho0 * (self.psi_cloud @ self.q2.T)
        out[np.diag_indices_from(out)] += self.rho0**2
        return out


def build_kernel_action(cloud: PointCloud, cfg: SwingConfig, rho) -> KernelAction:
    """Run both ensembles and assemble the cached action in one call."""
    traj1 = run_swing_walks(cloud, cfg, ensemble=0)
    traj2 = run_swing_walks(cloud, cfg, ensemble=1)
    return KernelAction(traj1, traj2, psi_map_for(cloud, cfg), rho)


def swing_dense_kernel(
    traj1: Trajectories, traj2: Trajectories, psi_map, rho
) -> np.ndarray:
    """Dense N x N kernel estimate (test and benchmark helper)."""
    return KernelAction(traj1, traj2, psi_map, rho).dense()
