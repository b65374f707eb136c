"""Random feature maps linearizing shift-invariant edge-weight functions.

Two map families:

* Complex Fourier features for any generator whose inverse Fourier
  transform is available: frequencies are drawn with density proportional
  to |tau|, phases stored as interleaved (cos, sin) real pairs so that a
  plain real dot product equals the real part of the complex estimator.
  Signed tau is handled by folding sign(tau) into the first-side features.
* Strictly positive real features for the Gaussian generator, with
  optional block-orthogonal frequency ensembles and importance-sampled
  frequencies for data far from the origin.

Both estimate h(x - y) without bias: averaging feature dot products over
frequency resampling recovers the generator value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log, pi, sqrt

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr

from .errors import InvalidInputError
from .pointcloud import PointCloud
from .weights import GaussianRBF, StepL1, StepL2, WeightFunction

#: Exponent magnitude beyond which positive-feature dot products switch to
#: log-space evaluation.
LOG_GUARD = 600.0

#: Half-periods of the sinc kept when sampling step-function frequencies.
DEFAULT_STEP_HALF_PERIODS = 64


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


# ---------------------------------------------------------------------------
# Complex Fourier features (interleaved real representation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierFeatureMap:
    """Random Fourier map for a shift-invariant generator.

    ``frequencies`` are expressed in the convention with phase
    2*pi*<omega, v>. The estimator of h(x - y) is the dot product of
    side-1 features at x with side-2 features at y; its expectation over
    frequency resampling is the (possibly band-limited) generator value.
    """

    frequencies: np.ndarray              # (r, d)
    normalizer: float                    # C = integral of |tau|
    signs: np.ndarray = None             # (r,) +-1, sign(tau) per frequency

    def __post_init__(self):
        freq = np.atleast_2d(np.asarray(self.frequencies, dtype=np.float64))
        if not np.all(np.isfinite(freq)):
            raise InvalidInputError("frequencies must be finite")
        if freq.shape[0] < 1:
            raise InvalidInputError("need at least one frequency")
        signs = self.signs
        if signs is None:
            signs = np.ones(freq.shape[0])
        signs = np.asarray(signs, dtype=np.float64)
        if signs.shape != (freq.shape[0],):
            raise InvalidInputError("signs must have one entry per frequency")
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "signs", signs)

    @property
    def r(self) -> int:
        return self.frequencies.shape[0]

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def feature_dim(self) -> int:
        return 2 * self.r

    def features(self, v: np.ndarray, side: int = 1) -> np.ndarray:
        """Interleaved (cos, sin) features, scaled by sqrt(C/r).

        ``side=1`` carries sign(tau); dot(side1(x), side2(y)) equals the
        real part of eta_1(x)^T eta_2(y).
        """
        v = np.asarray(v, dtype=np.float64)
        single = v.ndim == 1
        v2 = np.atleast_2d(v)
        theta = 2.0 * np.pi * (v2 @ self.frequencies.T)
        scale = sqrt(self.normalizer / self.r)
        out = np.empty(v2.shape[:-1] + (2 * self.r,), dtype=np.float64)
        out[..., 0::2] = np.cos(theta)
        out[..., 1::2] = np.sin(theta)
        if side == 1:
            out[..., 0::2] *= self.signs
            out[..., 1::2] *= self.signs
        out *= scale
        return out[0] if single else out

    def complex_features(self, v: np.ndarray, side: int = 1) -> np.ndarray:
        """Complex form: side 1 has phase -2*pi*<omega, v>, side 2 +."""
        v = np.asarray(v, dtype=np.float64)
        single = v.ndim == 1
        v2 = np.atleast_2d(v)
        theta = 2.0 * np.pi * (v2 @ self.frequencies.T)
        phase = -theta if side == 1 else theta
        out = sqrt(self.normalizer / self.r) * np.exp(1j * phase)
        if side == 1:
            out = out * self.signs
        return out[0] if single else out


def fourier_kernel_estimate(fmap: FourierFeatureMap, x: np.ndarray, y: np.ndarray) -> float:
    """Unbiased estimate of h(x - y): dot of side-1 at x with side-2 at y."""
    return float(np.dot(fmap.features(x, side=1), fmap.features(y, side=2)))


def sample_gaussian_fourier(
    sigma: float, d: int, r: int, seed_or_rng=0, orthogonal: bool = False
) -> FourierFeatureMap:
    """Fourier map for the Gaussian generator exp(-||z||^2 / (2 sigma^2)).

    The transform tau is a Gaussian density scaled so that C = h(0) = 1;
    sampling frequencies from it amounts to omega = g / (2 pi sigma) with
    g standard normal (optionally a block-orthogonal ensemble).
    """
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    if r < 1 or d < 1:
        raise InvalidInputError("need r >= 1 and d >= 1")
    rng = _as_rng(seed_or_rng)
    g = orthogonal_ensemble(d, r, rng) if orthogonal else rng.standard_normal((r, d))
    return FourierFeatureMap(frequencies=g / (2.0 * np.pi * sigma), normalizer=1.0)


def step_l1_transform(epsilon: float, v: np.ndarray) -> float:
    """Inverse Fourier transform of the L1-ball indicator of radius epsilon.

    Product over coordinates of sin(2 eps v_i) / v_i, with the removable
    singularity at v_i = 0 evaluated as 2 eps. Signed.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    # sin(2 eps t)/t = 2 eps * sinc(2 eps t / pi) handles t = 0 exactly
    return float(np.prod(2.0 * epsilon * np.sinc(2.0 * epsilon * v / np.pi)))


def _abs_sinc_integral(half_periods: int) -> float:
    """integral_0^{a} |sin u| / u du with a = half_periods * pi."""
    total = 0.0
    for k in range(half_periods):
        val, _ = integrate.quad(
            lambda u: abs(np.sin(u)) / u if u > 0 else 1.0, k * np.pi, (k + 1) * np.pi
        )
        total += val
    return total


def sample_step_l1_fourier(
    epsilon: float,
    d: int,
    r: int,
    seed_or_rng=0,
    half_periods: int = DEFAULT_STEP_HALF_PERIODS,
) -> FourierFeatureMap:
    """Signed Fourier map for the L1-ball indicator.

    tau is not absolutely integrable over all of R, so frequencies are
    drawn from density proportional to |tau| restricted to the first
    ``half_periods`` sinc lobes per coordinate; the estimator then targets
    the band-limited reconstruction of the indicator. Per-dimension
    rejection sampling uses the dominating envelope min(2 eps, 1/|v|);
    sign(tau) is stored per frequency and C is the integral of |tau| over
    the truncated band.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if r < 1 or d < 1 or half_periods < 1:
        raise InvalidInputError("need r >= 1, d >= 1, half_periods >= 1")
    rng = _as_rng(seed_or_rng)

    # raw frequency variable v with tau(v) = prod sin(2 eps v_i)/v_i;
    # band edge at v = half_periods * pi / (2 eps)
    v_edge = half_periods * np.pi / (2.0 * epsilon)
    v_knee = 1.0 / (2.0 * epsilon)  # envelope switches from 2 eps to 1/|v|
    mass_flat = 2.0 * (2.0 * epsilon) * v_knee  # = 2
    mass_tail = 2.0 * log(v_edge / v_knee)

    def draw_dim(count: int) -> np.ndarray:
        out = np.empty(count)
        filled = 0
        while filled < count:
            todo = count - filled
            want = max(2 * todo, 64)
            pick_tail = rng.random(want) < mass_tail / (mass_flat + mass_tail)
            u = rng.random(want)
            mag = np.where(pick_tail, v_knee * (v_edge / v_knee) ** u, u * v_knee)
            sign = np.where(rng.random(want) < 0.5, -1.0, 1.0)
            v = sign * mag
            envelope = np.where(pick_tail, 1.0 / mag, 2.0 * epsilon)
            target = np.abs(2.0 * epsilon * np.sinc(2.0 * epsilon * v / np.pi))
            keep = rng.random(want) * envelope < target
            kept = v[keep]
            take = min(len(kept), todo)
            out[filled : filled + take] = kept[:take]
            filled += take
        return out

    raw = np.column_stack([draw_dim(r) for _ in range(d)])
    signs = np.prod(np.sign(np.sinc(2.0 * epsilon * raw / np.pi)), axis=1)
    # integral of |tau| over the band, per dimension, then rescaled to the
    # 2*pi phase convention (omega = v / pi)
    c_dim = 2.0 * _abs_sinc_integral(half_periods) / np.pi
    return FourierFeatureMap(
        frequencies=raw / np.pi, normalizer=c_dim**d, signs=signs
    )


def step_l1_bandlimited(
    epsilon: float, z: np.ndarray, half_periods: int = DEFAULT_STEP_HALF_PERIODS
) -> float:
    """Quadrature oracle: band-limited reconstruction the signed map targets."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    v_edge = half_periods * np.pi / (2.0 * epsilon)
    out = 1.0
    for zi in z:
        val = 0.0
        for k in range(half_periods):
            part, _ = integrate.quad(
                lambda v: (2.0 * epsilon * np.sinc(2.0 * epsilon * v / np.pi))
                * np.cos(2.0 * v * zi),
                k * np.pi / (2.0 * epsilon),
                (k + 1) * np.pi / (2.0 * epsilon),
                limit=200,
            )
            val += part
        out *= 2.0 * val / np.pi
    return out


# ---------------------------------------------------------------------------
# Positive random features for the Gaussian generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositiveFeatureMap:
    """Strictly positive features for exp(-||z||^2 / (2 sigma^2)).

    Entry j of the map at u is
        (1/sqrt(r)) * sqrt(iota_j) * exp(-||u||^2/sigma^2) * exp(<omega_j, u>/sigma)
    where iota_j is the importance density ratio (1 for plain sampling).
    """

    frequencies: np.ndarray                      # (r, d)
    bandwidth: float                             # sigma
    importance_weights: np.ndarray = None        # (r,) density ratios
    orthogonal: bool = False

    def __post_init__(self):
        freq = np.atleast_2d(np.asarray(self.frequencies, dtype=np.float64))
        if not self.bandwidth > 0:
            raise InvalidInputError(f"bandwidth must be positive, got {self.bandwidth}")
        iota = self.importance_weights
        if iota is None:
            iota = np.ones(freq.shape[0])
        iota = np.asarray(iota, dtype=np.float64)
        if iota.shape != (freq.shape[0],) or not np.all(iota > 0):
            raise InvalidInputError("importance weights must be positive, one per frequency")
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "importance_weights", iota)

    @property
    def r(self) -> int:
        return self.frequencies.shape[0]

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.r

    def log_features(self, v: np.ndarray) -> np.ndarray:
        """Logarithms of the feature entries (always finite)."""
        v = np.asarray(v, dtype=np.float64)
        single = v.ndim == 1
        v2 = np.atleast_2d(v)
        s = self.bandwidth
        expo = (
            (v2 @ self.frequencies.T) / s
            - (np.sum(v2 * v2, axis=-1) / s**2)[..., None]
            + 0.5 * np.log(self.importance_weights)
            - 0.5 * log(self.r)
        )
        return expo[0] if single else expo

    def features(self, v: np.ndarray, side: int = 1) -> np.ndarray:
        """Feature entries; strictly positive. ``side`` is accepted for
        interface parity with the Fourier map and ignored."""
        return np.exp(self.log_features(v))


def positive_features(pmap: PositiveFeatureMap, u: np.ndarray) -> np.ndarray:
    """Positive feature vector at u (module-level form of the map method)."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.shape[0] != pmap.dim:
        raise InvalidInputError(f"expected a vector of dimension {pmap.dim}")
    return pmap.features(u)


def positive_kernel_estimate(pmap: PositiveFeatureMap, x: np.ndarray, y: np.ndarray) -> float:
    """Estimate of the Gaussian kernel at (x, y), safe for large exponents.

    When any entry exponent exceeds the guard threshold the dot product is
    re-assembled pairwise in log space instead of exponentiating entries.
    """
    lx = pmap.log_features(np.asarray(x, dtype=np.float64))
    ly = pmap.log_features(np.asarray(y, dtype=np.float64))
    if max(np.max(np.abs(lx)), np.max(np.abs(ly))) < LOG_GUARD:
        return float(np.dot(np.exp(lx), np.exp(ly)))
    pair = lx + ly
    peak = float(np.max(pair))
    return float(np.exp(peak) * np.sum(np.exp(pair - peak)))


def orthogonal_ensemble(d: int, r: int, seed_or_rng=0) -> np.ndarray:
    """Block-orthogonal Gaussian frequencies.

    Rows come in blocks of size min(d, remaining); each block is a Haar
    orthogonal matrix scaled by independent chi(d) norms, so every row is
    marginally standard normal while rows within a block are orthogonal.
    """
    if r < 1 or d < 1:
        raise InvalidInputError("need r >= 1 and d >= 1")
    rng = _as_rng(seed_or_rng)
    blocks = []
    remaining = r
    while remaining > 0:
        b = min(d, remaining)
        g = rng.standard_normal((d, d))
        q, rr = np.linalg.qr(g)
        q = q * np.sign(np.diag(rr))  # fix signs for Haar measure
        radii = np.sqrt(rng.chisquare(d, size=b))
        blocks.append(q[:b] * radii[:, None])
        remaining -= b
    return np.vstack(blocks)


def sample_positive_features(
    sigma: float, d: int, r: int, seed_or_rng=0, orthogonal: bool = False
) -> PositiveFeatureMap:
    """Positive feature map with iid or block-orthogonal Gaussian frequencies."""
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    if r < 1 or d < 1:
        raise InvalidInputError("need r >= 1 and d >= 1")
    rng = _as_rng(seed_or_rng)
    if orthogonal:
        freq = orthogonal_ensemble(d, r, rng)
    else:
        freq = rng.standard_normal((r, d))
    return PositiveFeatureMap(frequencies=freq, bandwidth=sigma, orthogonal=orthogonal)


def _log_sphere_area(d: int) -> float:
    return log(2.0) + (d / 2.0) * log(pi) - lgamma(d / 2.0)


def importance_proposal(
    cloud: PointCloud,
    sigma: float,
    alpha_is: float,
    d: int,
    r: int,
    seed_or_rng=0,
) -> PositiveFeatureMap:
    """Positive features with importance-sampled frequencies.

    The proposal is isotropic: a uniform direction times a radius from a
    normal with mean alpha_is * mu and unit variance, truncated to positive
    values, where mu is the median norm of the data points as the feature
    map consumes them (||p|| / sigma). Each frequency stores the exact
    standard-normal-to-proposal density ratio so estimates stay unbiased.
    """
    if not alpha_is > 0:
        raise InvalidInputError(f"alpha_is must be positive, got {alpha_is}")
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    if cloud.dim != d:
        raise InvalidInputError(f"cloud dimension {cloud.dim} != requested d {d}")
    if r < 1:
        raise InvalidInputError("need r >= 1")
    rng = _as_rng(seed_or_rng)
    mu = float(np.median(np.linalg.norm(cloud.points, axis=1))) / sigma
    center = alpha_is * mu

    radii = np.empty(r)
    filled = 0
    while filled < r:
        draw = center + rng.standard_normal(max(2 * (r - filled), 16))
        draw = draw[draw > 0]
        take = min(len(draw), r - filled)
        radii[filled : filled + take] = draw[:take]
        filled += take

    dirs = rng.standard_normal((r, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    freq = dirs * radii[:, None]

    # log density ratio standard normal / proposal, exactly zero when the
    # proposal degenerates to the standard normal (d = 1, center = 0)
    log_p = -0.5 * d * log(2.0 * pi) - 0.5 * radii**2
    log_radial = -0.5 * log(2.0 * pi) - 0.5 * (radii - center) ** 2 - log_ndtr(center)
    log_q = log_radial - _log_sphere_area(d) - (d - 1) * np.log(radii)
    log_iota = log_p - log_q
    return PositiveFeatureMap(
        frequencies=freq,
        bandwidth=sigma,
        importance_weights=np.exp(log_iota),
    )


# ---------------------------------------------------------------------------
# Map construction for the tempered generator f^(1/sigma_sq)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureSpec:
    """How to build a feature map: family, size and variance-reduction knobs."""

    r: int = 128
    kind: str = "positive"            # "positive" | "fourier"
    orthogonal: bool = False
    importance_alpha: float | None = None

    def __post_init__(self):
        if self.r < 1:
            raise InvalidInputError(f"feature count must be >= 1, got {self.r}")
        if self.kind not in ("positive", "fourier"):
            raise InvalidInputError(f"unknown feature kind {self.kind!r}")


def build_feature_map(
    f: WeightFunction,
    sigma_sq: float,
    spec: FeatureSpec,
    cloud: PointCloud,
    seed_or_rng=0,
):
    """Feature map whose dot products estimate f(x - y)^(1/sigma_sq).

    A Gaussian generator tempered by sigma_sq is another Gaussian with
    bandwidth scaled by sigma; step generators are idempotent under powers.
    """
    if not sigma_sq > 0:
        raise InvalidInputError(f"sigma_sq must be positive, got {sigma_sq}")
    rng = _as_rng(seed_or_rng)
    if isinstance(f, GaussianRBF):
        s_eff = f.bandwidth * sqrt(sigma_sq)
        if spec.kind == "fourier":
            return sample_gaussian_fourier(
                s_eff, cloud.dim, spec.r, rng, orthogonal=spec.orthogonal
            )
        if spec.importance_alpha is not None:
            return importance_proposal(
                cloud, s_eff, spec.importance_alpha, cloud.dim, spec.r, rng
            )
        return sample_positive_features(
            s_eff, cloud.dim, spec.r, rng, orthogonal=spec.orthogonal
        )
    if isinstance(f, StepL1):
        if spec.kind != "fourier":
            raise InvalidInputError("step generators only support Fourier features")
        return sample_step_l1_fourier(f.epsilon, cloud.dim, spec.r, rng)
    if isinstance(f, StepL2):
        raise InvalidInputError(
            "no frequency sampler is provided for the L2-ball indicator"
        )
    raise InvalidInputError(f"unsupported weight function {type(f).__name__}")
