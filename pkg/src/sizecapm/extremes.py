"""Curve ends of the standard normal market curve.

Both ends are described through the jump times ``tau_k`` of a unit-rate
Poisson process: the top end behaves like ``-ln tau_k`` and the bottom end
like ``ln tau_k``.  Gumbel normalizing constants map normal maxima onto the
same scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import optimize

from . import rng as rngmod
from .curves import CurvePoints

Method = Literal["classic", "hall"]
HALL_XTOL = 1e-12


@dataclass(frozen=True)
class PoissonArrivals:
    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        object.__setattr__(self, "tau", tau)
        if tau.ndim != 1 or len(tau) < 1:
            raise ValueError("need at least one arrival")
        if tau[0] <= 0 or np.any(np.diff(tau) <= 0):
            raise ValueError("arrival times must be positive and strictly increasing")

    def __len__(self) -> int:
        return len(self.tau)


def simulate_arrivals(m: int, seed) -> PoissonArrivals:
    """First m jump times: cumulative sums of unit exponentials."""
    if m < 1:
        raise ValueError("m must be >= 1")
    gen = rngmod.as_generator(seed)
    return PoissonArrivals(np.cumsum(gen.standard_exponential(m)))


def arrival_matrix(m: int, replicates: int, seed) -> np.ndarray:
    """``replicates x m`` array of independent arrival sequences."""
    gen = rngmod.as_generator(seed)
    return np.cumsum(gen.standard_exponential((replicates, m)), axis=1)


def upper_curve(arrivals: PoissonArrivals) -> CurvePoints:
    k = np.arange(1, len(arrivals) + 1)
    return CurvePoints(np.log(k), -np.log(arrivals.tau))


def lower_curve(arrivals: PoissonArrivals, N: int) -> CurvePoints:
    m = len(arrivals)
    if m > N:
        raise ValueError(f"need m <= N, got m={m}, N={N}")
    k = np.arange(1, m + 1)
    return CurvePoints(np.log(N + 1 - k), np.log(arrivals.tau))


def upper_reference(m: int) -> CurvePoints:
    """The line y = -x at x = ln k."""
    x = np.log(np.arange(1, m + 1))
    return CurvePoints(x, -x)


def lower_reference(m: int, N: int) -> CurvePoints:
    """y = ln(N + 1 - e^x) at x = ln(N + 1 - k)."""
    if m > N:
        raise ValueError(f"need m <= N, got m={m}, N={N}")
    k = np.arange(1, m + 1)
    # N + 1 - e^x is exactly k on these abscissae; use it to avoid cancellation
    return CurvePoints(np.log(N + 1 - k), np.log(k.astype(float)))


@dataclass(frozen=True)
class GumbelConstants:
    a_n: float
    b_n: float
    method: Method
    n: float

    def standardize(self, x):
        return (np.asarray(x, dtype=float) - self.b_n) / self.a_n


def normal_pdf(u: float) -> float:
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def gumbel_constants(n: float, method: Method = "hall") -> GumbelConstants:
    """Normalizing constants for the maximum of n standard normals.

    ``classic`` uses the textbook square-root-log formulas; ``hall`` solves
    ``n * phi(b) = b`` by bisection and sets ``a = 1 / b``.
    """
    if method == "classic":
        if not n > 1:
            raise ValueError(f"classic constants need n > 1, got {n}")
        r = math.sqrt(2.0 * math.log(n))
        return GumbelConstants(1.0 / r, r - math.log(4.0 * math.pi * math.log(n)) / (2.0 * r), "classic", n)
    if method == "hall":
        if not n >= 1:
            raise ValueError(f"Hall constants need n >= 1, got {n}")
        # log form of n*phi(b) - b, strictly decreasing for b > 0
        f = lambda b: math.log(n) - 0.5 * b * b - 0.5 * math.log(2.0 * math.pi) - math.log(b)
        lo, hi = 0.1, math.sqrt(2.0 * math.log(n)) + 2.0
        if f(lo) * f(hi) > 0:
            raise ArithmeticError(f"Hall equation root not bracketed for n={n}")
        b = optimize.bisect(f, lo, hi, xtol=HALL_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
        return GumbelConstants(1.0 / b, b, "hall", n)
    raise ValueError(f"unknown method {method!r}")


def hall_residual(c: GumbelConstants) -> float:
    return abs(c.n * normal_pdf(c.b_n) - c.b_n)


def normal_market_curve(N: int, seed) -> CurvePoints:
    """``(ln k, Z_(k))`` for an IID standard normal sample sorted descending."""
    if N < 1:
        raise ValueError("N must be >= 1")
    z = rngmod.as_generator(seed).standard_normal(N)
    return CurvePoints(np.log(np.arange(1, N + 1)), np.sort(z)[::-1])


def _top_k(x: np.ndarray, k: int) -> np.ndarray:
    if k == len(x):
        return np.sort(x)[::-1]
    part = np.partition(x, len(x) - k)[len(x) - k:]
    return np.sort(part)[::-1]


def top_k_standardized(N: int, k: int, constants: GumbelConstants, seed) -> np.ndarray:
    """``((X_(1) - b_N)/a_N, ..., (X_(k) - b_N)/a_N)`` for N standard normals."""
    if not 1 <= k <= N:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    x = rngmod.as_generator(seed).standard_normal(N)
    return (_top_k(x, k) - constants.b_n) / constants.a_n


def bottom_k_standardized(N: int, k: int, constants: GumbelConstants, seed) -> np.ndarray:
    """``((X_(N) + b_N)/a_N, ..., (X_(N-k+1) + b_N)/a_N)``, smallest first."""
    if not 1 <= k <= N:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    x = rngmod.as_generator(seed).standard_normal(N)
    low = -_top_k(-x, k)
    return (low + constants.b_n) / constants.a_n


def top_k_replicates(N: int, k: int, constants: GumbelConstants, replicates: int, seed: int) -> np.ndarray:
    """``replicates x k``; replicate r uses stream (seed, REPLICATE, r)."""
    out = np.empty((replicates, k))
    for r in range(replicates):
        out[r] = top_k_standardized(N, k, constants, rngmod.stream(seed, rngmod.REPLICATE, r))
    return out


def log_gap_samples(k: int, replicates: int, seed) -> np.ndarray:
    """Samples of ``ln tau_{k+1} - ln tau_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tau = arrival_matrix(k + 1, replicates, seed)
    return np.log(tau[:, k]) - np.log(tau[:, k - 1])
