"""Gumbel-trick sampling and the exact relaxed transition oracle.

The categorical step of a weighted random walk can be written as an argmax
of log-weights plus iid Gumbel noise; softening the argmax to a softmax at
temperature sigma_sq gives a differentiable transition whose output is a
convex combination of the node positions. Exponentiated Gumbel noise is
Frechet-distributed and factorizes into an independent per-point factor
and per-walker factor, which is what makes the linearized transition
precomputable.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptySupportError, InvalidInputError
from .pointcloud import PointCloud
from .weights import WeightFunction

_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_gumbel(seed_or_rng, size=None):
    """Standard Gumbel(0, 1) samples via -log(-log U), U clamped off {0, 1}."""
    rng = _as_rng(seed_or_rng)
    u = np.clip(rng.random(size), _U_LO, _U_HI)
    return -np.log(-np.log(u))


def sample_frechet(seed_or_rng, sigma_sq: float, size=None):
    """Frechet samples: the law of exp(tau / sigma_sq) for Gumbel tau.

    Shape parameter sigma_sq, scale 1: P(X <= y) = exp(-y^-sigma_sq).
    """
    if not sigma_sq > 0:
        raise InvalidInputError(f"sigma_sq must be positive, got {sigma_sq}")
    return np.exp(sample_gumbel(seed_or_rng, size) / sigma_sq)


def sample_point_factors(seed_or_rng, sigma_sq: float, size=None):
    """Per-point factors a with density sigma_sq y^(-1-2 sigma_sq) exp(-1/(2 y^(2 sigma_sq))).

    Constructively 2^(-1/(2 sigma_sq)) * sqrt(F) for F Frechet with shape
    sigma_sq; the product with an independent walker factor is Frechet.
    """
    if not sigma_sq > 0:
        raise InvalidInputError(f"sigma_sq must be positive, got {sigma_sq}")
    rng = _as_rng(seed_or_rng)
    return 2.0 ** (-1.0 / (2.0 * sigma_sq)) * np.sqrt(sample_frechet(rng, sigma_sq, size))


def sample_walker_factors(seed_or_rng, sigma_sq: float, size=None):
    """Per-walker factors b with density sqrt(2/pi) sigma_sq y^(-1-sigma_sq) exp(-1/(2 y^(2 sigma_sq))).

    Constructively eta^(-1/sigma_sq) for eta standard half-normal.
    """
    if not sigma_sq > 0:
        raise InvalidInputError(f"sigma_sq must be positive, got {sigma_sq}")
    rng = _as_rng(seed_or_rng)
    eta = np.abs(rng.standard_normal(size))
    eta = np.maximum(eta, _U_LO)
    return eta ** (-1.0 / sigma_sq)


def gumbel_max_select(weights: np.ndarray, noise: np.ndarray) -> int:
    """Index of argmax_i [log w_i + tau_i], zero-weight entries excluded.

    Over fresh Gumbel noise the selected index follows the categorical
    distribution with probabilities w / sum(w).
    """
    w = np.asarray(weights, dtype=np.float64)
    tau = np.asarray(noise, dtype=np.float64)
    if w.shape != tau.shape or w.ndim != 1:
        raise InvalidInputError("weights and noise must be 1-d arrays of equal length")
    if np.any(w < 0):
        raise InvalidInputError("weights must be nonnegative")
    positive = w > 0
    if not positive.any():
        raise InvalidInputError("all weights are zero; no categorical support")
    scores = np.full(w.shape, -np.inf)
    scores[positive] = np.log(w[positive]) + tau[positive]
    return int(np.argmax(scores))


def relaxed_transition_coefficients(
    cloud: PointCloud,
    f: WeightFunction,
    x: np.ndarray,
    sigma_sq: float,
    noise: np.ndarray,
) -> np.ndarray:
    """Gumbel-softmax coefficients over the cloud at temperature sigma_sq.

    Coefficient i is proportional to exp((log f(p_i - x) + tau_i) / sigma_sq),
    computed in log space with max subtraction; zero weights get exactly
    zero coefficient.
    """
    if not sigma_sq > 0:
        raise InvalidInputError(f"sigma_sq must be positive, got {sigma_sq}")
    x = np.asarray(x, dtype=np.float64)
    tau = np.asarray(noise, dtype=np.float64)
    if x.shape != (cloud.dim,):
        raise InvalidInputError(f"x must be a vector of dimension {cloud.dim}")
    if tau.shape != (cloud.n,):
        raise InvalidInputError(f"noise must have one entry per cloud point ({cloud.n})")
    fv = np.asarray(f(cloud.points - x), dtype=np.float64)
    logits = np.full(cloud.n, -np.inf)
    positive = fv > 0
    if not positive.any():
        raise EmptySupportError("all weights vanish at this location (empty support)")
    logits[positive] = (np.log(fv[positive]) + tau[positive]) / sigma_sq
    peak = np.max(logits)
    expd = np.exp(logits - peak)
    return expd / expd.sum()


def relaxed_transition_exact(
    cloud: PointCloud,
    f: WeightFunction,
    x: np.ndarray,
    sigma_sq: float,
    noise: np.ndarray,
) -> np.ndarray:
    """Exact O(N) relaxed transition: convex combination of cloud points.

    This is the quadratic-cost oracle the linearized transition is tested
    against; the output always lies in the convex hull of the cloud.
    """
    coeffs = relaxed_transition_coefficients(cloud, f, x, sigma_sq, noise)
    return coeffs @ cloud.points
