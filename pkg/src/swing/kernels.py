"""Graph kernels as truncated power series in the weight matrix.

A kernel matrix is K = sum_k alpha_k W^k for a family-specific coefficient
sequence alpha. The modulation sequence rho is the "square root under
convolution" of alpha: sum_{p<=k} rho(k-p) rho(p) = alpha_k. Random-walk
estimators deposit rho(t)-modulated loads, so products of two independent
walk ensembles reassemble alpha term by term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Union

import numpy as np

from .errors import ConvergenceError, InvalidInputError, InvalidKernelError

#: Relative tail-magnitude threshold for series convergence at K_max.
SERIES_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class Diffusion:
    """alpha_k = lam^k / k!, i.e. K = exp(lam * W)."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidKernelError(f"diffusion rate must be positive, got {self.lam}")

    def coefficient(self, k: int) -> float:
        # lam^k/k! computed incrementally by callers; direct form is fine here
        out = 1.0
        for i in range(1, k + 1):
            out *= self.lam / i
        return out


@dataclass(frozen=True)
class PStepRW:
    """Coefficients of (a*I + W)^p: alpha_k = C(p, k) a^(p-k) for k <= p."""

    p: int
    a: float

    def __post_init__(self):
        if self.p < 1:
            raise InvalidKernelError(f"step count must be a positive integer, got {self.p}")
        if not self.a > 0:
            raise InvalidKernelError(f"shift must be positive, got {self.a}")

    def coefficient(self, k: int) -> float:
        if k > self.p:
            return 0.0
        return comb(self.p, k) * self.a ** (self.p - k)


@dataclass(frozen=True)
class DRegLaplacian:
    """Geometric series alpha_k = gamma^k, the expansion of (I - gamma W)^-1."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidKernelError(f"gamma must be positive, got {self.gamma}")

    def coefficient(self, k: int) -> float:
        return self.gamma**k


KernelFamily = Union[Diffusion, PStepRW, DRegLaplacian]


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family truncated at order k_max, with materialized coefficients."""

    family: KernelFamily
    k_max: int = 30
    coefficients: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.k_max < 1:
            raise InvalidKernelError(f"k_max must be a positive integer, got {self.k_max}")
        coeffs = np.array(
            [self.family.coefficient(k) for k in range(self.k_max + 1)], dtype=np.float64
        )
        object.__setattr__(self, "coefficients", coeffs)

    def coefficient(self, k: int) -> float:
        return self.family.coefficient(k)


@dataclass(frozen=True)
class Modulation:
    """Sequence rho with rho * rho (discrete convolution) equal to alpha."""

    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def reconvolved(self) -> np.ndarray:
        """sum_{p<=k} rho(k-p) rho(p) for every k covered by the values."""
        v = self.values
        return np.array(
            [np.dot(v[: k + 1], v[k::-1]) for k in range(len(v))], dtype=v.dtype
        )


def deconvolve_modulation(spec: KernelSpec, t_max: int) -> Modulation:
    """Solve the convolution-square-root recursion for rho(0..t_max).

    rho(0) = sqrt(alpha_0) and each later term clears the k-th convolution
    equation. Requires alpha_0 > 0 (real branch).
    """
    if t_max < 0:
        raise InvalidInputError(f"t_max must be nonnegative, got {t_max}")
    alpha0 = spec.coefficient(0)
    if not alpha0 > 0:
        raise InvalidKernelError(
            f"leading coefficient must be positive for a real modulation, got {alpha0}"
        )
    rho = np.zeros(t_max + 1, dtype=np.float64)
    rho[0] = np.sqrt(alpha0)
    for k in range(1, t_max + 1):
        cross = np.dot(rho[1:k], rho[k - 1 : 0 : -1]) if k >= 2 else 0.0
        rho[k] = (spec.coefficient(k) - cross) / (2.0 * rho[0])
    return Modulation(rho)


def exact_kernel(w: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Dense truncated series sum_{k<=k_max} alpha_k W^k (test oracle).

    Raises :class:`ConvergenceError` when the final term is still large
    relative to the accumulated sum, which signals a divergent or
    under-truncated series.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInputError(f"W must be square, got shape {w.shape}")
    n = w.shape[0]
    coeffs = spec.coefficients
    kernel = np.eye(n) * coeffs[0]
    power = np.eye(n)
    last_term_norm = 0.0
    for k in range(1, spec.k_max + 1):
        power = power @ w
        if coeffs[k] != 0.0:
            term = coeffs[k] * power
            kernel += term
            last_term_norm = float(np.linalg.norm(term))
        else:
            last_term_norm = 0.0
    scale = max(float(np.linalg.norm(kernel)), 1.0)
    if last_term_norm > SERIES_TAIL_TOL * scale:
        raise ConvergenceError(
            f"series tail at k_max={spec.k_max} has magnitude {last_term_norm:.3e} "
            f"(relative {last_term_norm / scale:.3e}); increase k_max or shrink the kernel "
            "parameter",
            tail_magnitude=last_term_norm,
        )
    return kernel


def fne(kernel: np.ndarray, approx: np.ndarray) -> float:
    """Relative Frobenius norm error ||K - K_hat||_F / ||K||_F."""
    kernel = np.asarray(kernel, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    if kernel.shape != approx.shape:
        raise InvalidInputError(
            f"shape mismatch: {kernel.shape} vs {approx.shape}"
        )
    denom = float(np.linalg.norm(kernel))
    if denom == 0.0:
        raise ZeroDivisionError("reference kernel has zero Frobenius norm")
    return float(np.linalg.norm(kernel - approx)) / denom
