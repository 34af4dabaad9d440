"""Log-scale AR(1) model of the volatility index."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats

from .data import MonthlySeries
from .regression import ols_fit
from .rng import as_generator

# Fitted values used for the market simulations; see VarianceGammaParams.default.
ALPHA = 0.346
BETA = 0.882
VG_LOC = 0.0621
VG_SCALE = 0.0621
VG_VOL = 0.1392
VG_SHAPE = 1.0 / 0.6573

LOG_TERM_TOL = 1e-14
DEFAULT_TERMS = 500


class MgfDomainError(ValueError):
    pass


@dataclass(frozen=True)
class VarianceGammaParams:
    """``W = c0 + c1*G + c2*sqrt(G)*Y`` with ``G ~ Gamma(shape, rate=shape)``."""

    c0: float
    c1: float
    c2: float
    gamma_shape: float

    def __post_init__(self):
        if not self.gamma_shape > 0:
            raise ValueError("gamma_shape must be positive")
        if self.c2 < 0:
            raise ValueError("c2 must be non-negative")

    @classmethod
    def default(cls) -> "VarianceGammaParams":
        # Location chosen so E[W] = 0, keeping the stationary mean of ln V at alpha/(1-beta).
        return cls(-VG_LOC, VG_SCALE, VG_VOL, VG_SHAPE)

    @classmethod
    def as_printed(cls) -> "VarianceGammaParams":
        return cls(VG_LOC, VG_SCALE, VG_VOL, VG_SHAPE)

    @property
    def mean(self) -> float:
        return self.c0 + self.c1

    @property
    def variance(self) -> float:
        return self.c1**2 / self.gamma_shape + self.c2**2

    def log_mgf(self, s: float) -> float:
        theta = self.c1 * s + 0.5 * self.c2**2 * s**2
        k = self.gamma_shape
        if theta >= k:
            raise MgfDomainError(f"variance-gamma MGF diverges at s={s} (theta={theta} >= {k})")
        return self.c0 * s - k * math.log1p(-theta / k)

    def combine(self, Y, G):
        return self.c0 + self.c1 * G + self.c2 * np.sqrt(G) * Y


@dataclass(frozen=True)
class GaussianParams:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def mean(self) -> float:
        return 0.0

    @property
    def variance(self) -> float:
        return self.sigma**2

    def log_mgf(self, s: float) -> float:
        return 0.5 * self.sigma**2 * s**2

    def combine(self, Y, G):
        return self.sigma * np.asarray(Y, dtype=float)


Innovation = Union[VarianceGammaParams, GaussianParams]


@dataclass(frozen=True)
class VixModel:
    """``ln V(t) = alpha + beta ln V(t-1) + W(t)``."""

    alpha: float = ALPHA
    beta: float = BETA
    innovation: Innovation = VarianceGammaParams.default()

    @property
    def stationary(self) -> bool:
        return abs(self.beta) < 1

    @property
    def log_mean(self) -> float:
        """Stationary mean of ln V."""
        self._require_stationary()
        return (self.alpha + self.innovation.mean) / (1.0 - self.beta)

    @property
    def log_variance(self) -> float:
        self._require_stationary()
        return self.innovation.variance / (1.0 - self.beta**2)

    def _require_stationary(self):
        if not self.stationary:
            raise ValueError(f"|beta| < 1 required, got beta={self.beta}")


@dataclass(frozen=True)
class Ar1Fit:
    alpha: float
    beta: float
    innovations: np.ndarray
    beta_ci95: tuple[float, float]
    alpha_stderr: float
    beta_stderr: float

    def innovation_moments(self) -> dict:
        w = self.innovations
        return {
            "mean": float(np.mean(w)),
            "std": float(np.std(w, ddof=1)),
            "skewness": float(stats.skew(w)),
            "excess_kurtosis": float(stats.kurtosis(w)),
        }


def fit_log_ar1(v) -> Ar1Fit:
    """OLS of ln V(t) on [1, ln V(t-1)]."""
    values = v.values if isinstance(v, MonthlySeries) else np.asarray(v, dtype=float)
    if len(values) < 30:
        raise ValueError(f"need at least 30 observations, got {len(values)}")
    if (values <= 0).any():
        raise ValueError("volatility values must be strictly positive")
    lv = np.log(values)
    X = np.column_stack([np.ones(len(lv) - 1), lv[:-1]])
    fit = ols_fit(X, lv[1:])
    q = stats.t.ppf(0.975, fit.dof)
    beta = float(fit.coefficients[1])
    se = float(fit.stderr[1])
    return Ar1Fit(
        alpha=float(fit.coefficients[0]),
        beta=beta,
        innovations=fit.residuals,
        beta_ci95=(beta - q * se, beta + q * se),
        alpha_stderr=float(fit.stderr[0]),
        beta_stderr=se,
    )


def sample_vg(params: VarianceGammaParams, rng, size=None):
    """Draw variance-gamma innovations; a float when ``size`` is None."""
    rng = as_generator(rng)
    k = params.gamma_shape
    G = rng.gamma(k, 1.0 / k, size=size)
    Y = rng.standard_normal(size=size)
    w = params.combine(Y, G)
    return float(w) if size is None else w


def draw_innovation_parts(innovation: Innovation, rng: np.random.Generator, T: int):
    """Gaussian driver ``Y`` and mixing variable ``G`` for T steps.

    ``G`` is all ones for Gaussian innovations.  Draw order is fixed so a
    seed fully determines the path.
    """
    Y = rng.standard_normal(T)
    if isinstance(innovation, VarianceGammaParams):
        k = innovation.gamma_shape
        G = rng.gamma(k, 1.0 / k, size=T)
    else:
        G = np.ones(T)
    return Y, G


def log_vix_path(model: VixModel, W: np.ndarray, lnv0: float) -> np.ndarray:
    """ln V(0..T-1) with ln V(0) = lnv0 and W[t] driving step t (W[0] unused)."""
    T = len(W)
    out = np.empty(T)
    out[0] = lnv0
    a, b = model.alpha, model.beta
    x = lnv0
    for t in range(1, T):
        x = a + b * x + W[t]
        out[t] = x
    return out


def simulate_log_vix(model: VixModel, T: int, lnv0: float, rng) -> np.ndarray:
    """Index-scale path V(0..T-1) starting from exp(lnv0)."""
    if T < 1:
        raise ValueError("T must be >= 1")
    rng = as_generator(rng)
    Y, G = draw_innovation_parts(model.innovation, rng, T)
    W = model.innovation.combine(Y, G)
    return np.exp(log_vix_path(model, W, lnv0))


@dataclass(frozen=True)
class MomentResult:
    value: float
    log_value: float
    terms_used: int
    tail_bound: float


def stationary_moment_details(model: VixModel, u: float, terms: int = DEFAULT_TERMS) -> MomentResult:
    """E[V^u] as ``exp(alpha u/(1-beta)) * prod_k M_W(beta^k u)``, truncated.

    ``tail_bound`` bounds the absolute error of ``log_value`` from dropped
    factors, assuming the log-MGF terms keep shrinking at least geometrically
    with ratio ``|beta|``.
    """
    if not 0 < u <= 2:
        raise ValueError(f"u must be in (0, 2], got {u}")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    model._require_stationary()
    b = model.beta
    total = model.alpha * u / (1.0 - b)
    last = 0.0
    used = 0
    s = u
    for k in range(terms):
        last = model.innovation.log_mgf(s)
        total += last
        used = k + 1
        if abs(last) < LOG_TERM_TOL:
            break
        s *= b
    bound = abs(last) * abs(b) / (1.0 - abs(b))
    return MomentResult(math.exp(total), total, used, bound)


def stationary_moment(model: VixModel, u: float, terms: int = DEFAULT_TERMS) -> float:
    return stationary_moment_details(model, u, terms).value
