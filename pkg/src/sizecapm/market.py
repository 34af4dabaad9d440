"""Market simulation: volatility, benchmark, N relative-size processes.

Each portfolio's log relative size follows the random-coefficient recursion

    C_k(t+1) = (1 + a V(t) + b R_0(t)) C_k(t) + V(t) (m + eps_k(t)),

with ``R_0(t) = V(t) (g + Z(t))``.  Only the Gaussian driver of the
volatility innovation and ``Z`` are correlated; every other innovation is
independent.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from . import rng as rngmod
from .curves import CurvePoints
from .volatility import (
    GaussianParams,
    VarianceGammaParams,
    VixModel,
    draw_innovation_parts,
    log_vix_path,
)

OVERFLOW_LIMIT = 700.0
UNITS = {"index": 1.0, "decimal": 0.01}


class SizeOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Generative parameters; defaults are the simulation-study set with c = 0.1."""

    vix: VixModel = VixModel()
    g: float = 0.062
    G: float = 0.062
    z_sigma: float = 0.202
    rho: float = 0.0
    a: float = 0.0
    b: float = -0.1
    m: float = 0.0
    A: float = 0.0
    B: float = -0.1
    M: float = 0.0
    sigma_eps: float = 1.0
    N: int = 100
    vix_units: Literal["index", "decimal"] = "index"
    shared_premia_noise: bool = False

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [-1, 1], got {self.rho}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.z_sigma < 0 or self.sigma_eps < 0:
            raise ValueError("z_sigma and sigma_eps must be non-negative")
        if self.vix_units not in UNITS:
            raise ValueError(f"vix_units must be one of {sorted(UNITS)}, got {self.vix_units!r}")

    @property
    def v_scale(self) -> float:
        return UNITS[self.vix_units]

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    # flat key=value view, used by config files and CLI overrides

    def to_flat(self) -> dict:
        inn = self.vix.innovation
        flat = {"alpha": self.vix.alpha, "beta": self.vix.beta}
        if isinstance(inn, VarianceGammaParams):
            flat.update(innovation="variance_gamma", vg_c0=inn.c0, vg_c1=inn.c1, vg_c2=inn.c2, vg_shape=inn.gamma_shape)
        else:
            flat.update(innovation="gaussian", sigma_w=inn.sigma)
        for f in dataclasses.fields(self):
            if f.name != "vix":
                flat[f.name] = getattr(self, f.name)
        return flat

    @classmethod
    def from_flat(cls, flat: dict, base: Optional["ModelParams"] = None) -> "ModelParams":
        base = base or cls()
        current = base.to_flat()
        unknown = set(flat) - set(current) - {"sigma_w", "vg_c0", "vg_c1", "vg_c2", "vg_shape"}
        if unknown:
            raise KeyError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        merged = {**current, **flat}
        kind = str(merged["innovation"])
        if kind == "variance_gamma":
            d = VarianceGammaParams.default()
            inn = VarianceGammaParams(
                float(merged.get("vg_c0", d.c0)),
                float(merged.get("vg_c1", d.c1)),
                float(merged.get("vg_c2", d.c2)),
                float(merged.get("vg_shape", d.gamma_shape)),
            )
        elif kind == "gaussian":
            inn = GaussianParams(float(merged.get("sigma_w", 0.0)))
        else:
            raise ValueError(f"innovation must be 'variance_gamma' or 'gaussian', got {kind!r}")
        vix = VixModel(float(merged["alpha"]), float(merged["beta"]), inn)
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name == "vix":
                continue
            v = merged[f.name]
            if f.name == "N":
                v = int(v)
            elif f.name == "vix_units":
                v = str(v)
            elif f.name == "shared_premia_noise":
                v = _as_bool(v)
            else:
                v = float(v)
            kwargs[f.name] = v
        return cls(vix=vix, **kwargs)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in {"1", "true", "yes", "on"}:
        return True
    if s in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"cannot interpret {v!r} as a boolean")


@dataclass(frozen=True)
class SimPaths:
    """Simulated trajectories.

    ``V``, ``R0``, ``Z`` (mean-zero benchmark noise) have length T; ``C`` is
    ``N x (T+1)`` with ``C[:, 0]`` the initial condition; ``eps`` is ``N x T``.
    """

    V: np.ndarray
    R0: np.ndarray
    Z: np.ndarray
    C: np.ndarray
    eps: Optional[np.ndarray]
    seed: int

    @property
    def T(self) -> int:
        return len(self.V)

    @property
    def N(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class BenchmarkPath:
    V: np.ndarray
    R0: np.ndarray
    Z: np.ndarray


def simulate_benchmark(params: ModelParams, T: int, lnv0: float, seed: int, gen=None) -> BenchmarkPath:
    """Volatility and benchmark returns, drawn from the market stream of ``seed``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if gen is None:
        gen = rngmod.stream(seed, rngmod.MARKET)
    inn = params.vix.innovation
    Y, G = draw_innovation_parts(inn, gen, T)
    other = gen.standard_normal(T)
    W = inn.combine(Y, G)
    V = np.exp(log_vix_path(params.vix, W, lnv0)) * params.v_scale
    rho = params.rho
    Z = params.z_sigma * (rho * Y + math.sqrt(1.0 - rho * rho) * other)
    R0 = V * (params.g + Z)
    return BenchmarkPath(V, R0, Z)


def portfolio_noise(seed: int, N: int, T: int, sigma: float, workers: int = 1, kind: int = rngmod.PORTFOLIO) -> np.ndarray:
    """``N x T`` matrix; row k comes from its own stream (seed, kind, k)."""
    out = np.empty((N, T))

    def fill(k):
        out[k] = rngmod.stream(seed, kind, k).standard_normal(T) * sigma

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(N)))
    else:
        for k in range(N):
            fill(k)
    return out


def evolve_relative_sizes(A: np.ndarray, V: np.ndarray, m: float, eps: np.ndarray, c0: np.ndarray) -> np.ndarray:
    """Run the linear recursion for all portfolios at once."""
    N, T = eps.shape
    C = np.empty((N, T + 1))
    C[:, 0] = c0
    for t in range(T):
        C[:, t + 1] = A[t] * C[:, t] + V[t] * (m + eps[:, t])
    return C


def contraction_factors(params: ModelParams, V, R0) -> np.ndarray:
    return 1.0 + params.a * np.asarray(V) + params.b * np.asarray(R0)


def simulate_market(
    params: ModelParams,
    T: int,
    c0=None,
    lnv0: float = 3.0,
    seed: int = 0,
    eps_seed: Optional[int] = None,
    workers: int = 1,
    keep_eps: bool = True,
) -> SimPaths:
    """Simulate V, R_0 and N relative-size paths.

    ``eps_seed`` redraws the portfolio innovations while keeping the
    (V, R_0) path of ``seed``.  Output does not depend on ``workers``.
    """
    bench = simulate_benchmark(params, T, lnv0, seed)
    N = params.N
    c0 = np.zeros(N) if c0 is None else np.broadcast_to(np.asarray(c0, dtype=float), (N,)).copy()
    eps = portfolio_noise(seed if eps_seed is None else eps_seed, N, T, params.sigma_eps, workers)
    A = contraction_factors(params, bench.V, bench.R0)
    with np.errstate(over="ignore", invalid="ignore"):
        C = evolve_relative_sizes(A, bench.V, params.m, eps, c0)
    if not np.isfinite(C).all():
        raise SizeOverflowError("relative sizes diverged to non-finite values; the parameters are likely unstable")
    return SimPaths(bench.V, bench.R0, bench.Z, C, eps if keep_eps else None, seed)


def price_returns(paths: SimPaths, params: ModelParams) -> np.ndarray:
    """Portfolio log price returns ``R_k(t)``, ``N x T``, from the stored innovations."""
    if paths.eps is None:
        raise ValueError("paths were simulated without keep_eps")
    C = paths.C[:, :-1]
    norm = params.g + paths.Z
    return paths.V * (params.m + params.a * C + (1.0 + params.b * C) * norm + paths.eps)


@dataclass(frozen=True)
class PremiaPaths:
    P0: np.ndarray
    P: np.ndarray
    Zp: np.ndarray


def simulate_premia(paths: SimPaths, params: ModelParams, seed: int, shared: Optional[bool] = None) -> PremiaPaths:
    """Benchmark and portfolio equity premia along simulated paths.

    With ``shared`` (default ``params.shared_premia_noise``) the premia
    noise reuses the returns noise ``Z``; otherwise an independent copy.
    """
    shared = params.shared_premia_noise if shared is None else shared
    T = paths.T
    if shared:
        Zp = paths.Z
    else:
        Zp = rngmod.stream(seed, rngmod.PREMIA).standard_normal(T) * params.z_sigma
    norm = params.G + Zp
    P0 = paths.V * norm
    delta = portfolio_noise(seed, paths.N, T, 1.0, kind=rngmod.PREMIA_PORTFOLIO)
    C = paths.C[:, :-1]
    P = paths.V * (params.M + params.A * C + (1.0 + params.B * C) * norm + delta)
    return PremiaPaths(P0, P, Zp)


def market_weights(C, s0: float = 1.0) -> np.ndarray:
    """Weights ``(mu_0, mu_1, ..., mu_N)``; ``mu_0`` is the benchmark."""
    C = np.asarray(C, dtype=float)
    if not s0 > 0:
        raise ValueError("s0 must be positive")
    if not np.isfinite(C).all():
        raise ValueError("relative sizes must be finite")
    if C.size and np.abs(C).max() > OVERFLOW_LIMIT:
        raise SizeOverflowError(
            f"|C| = {np.abs(C).max():.1f} exceeds {OVERFLOW_LIMIT}; rescale by subtracting a common constant"
        )
    sizes = s0 * np.concatenate([[1.0], np.exp(C)])
    return sizes / sizes.sum()


def capital_curve(C) -> CurvePoints:
    """``(ln k, C_(k))`` with C sorted descending, ties by original index."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 1 or len(C) < 1:
        raise ValueError("need a non-empty 1-d array")
    order = np.argsort(-C, kind="stable")
    k = np.arange(1, len(C) + 1)
    return CurvePoints(np.log(k), C[order])


def weight_curve(C, s0: float = 1.0) -> CurvePoints:
    """Capital distribution curve on weights: ``(ln(n+1), ln mu_(n))``, n = 0..N."""
    w = market_weights(C, s0)
    order = np.argsort(-w, kind="stable")
    return CurvePoints(np.log(np.arange(1, len(w) + 1)), np.log(w[order]))


@dataclass(frozen=True)
class ConditionalMoments:
    M_cond: float
    S_cond: float
    truncation_terms: int


def conditional_moments(V_path, Z_path, params: ModelParams, terms: Optional[int] = None) -> ConditionalMoments:
    """Conditional mean and sd of C_k(L) given the last L steps of (V, Z).

    Sums ``B_n + A_n B_{n-1} + A_n A_{n-1} B_{n-2} + ...`` term by term,
    with n the last index of the paths.
    """
    V = np.asarray(V_path, dtype=float)
    Z = np.asarray(Z_path, dtype=float)
    if V.shape != Z.shape or V.ndim != 1:
        raise ValueError("V_path and Z_path must be 1-d and equal length")
    L = len(V)
    terms = L if terms is None else int(terms)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if terms > L:
        raise ValueError(f"terms={terms} exceeds path length {L}")
    A = 1.0 + params.a * V + params.b * V * (params.g + Z)
    Ar = A[::-1][: terms - 1]
    Vr = V[::-1][:terms]
    w = np.concatenate([[1.0], np.cumprod(Ar)])
    M = params.m * float(np.sum(w * Vr))
    S2 = params.sigma_eps**2 * float(np.sum((w * Vr) ** 2))
    S = math.sqrt(S2)
    if not (math.isfinite(M) and math.isfinite(S) and S > 0):
        raise ValueError(f"conditional moments not usable: M={M}, S={S}")
    return ConditionalMoments(M, S, terms)


def standardize_curve(C, cm: ConditionalMoments) -> np.ndarray:
    if not cm.S_cond > 0:
        raise ValueError("S_cond must be positive")
    return (np.asarray(C, dtype=float) - cm.M_cond) / cm.S_cond
