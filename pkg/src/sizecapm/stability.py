"""Monte Carlo checks of the log-contraction condition E ln|1 + aV + bR_0| < 0."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from . import rng as rngmod
from .market import ModelParams, simulate_benchmark

Verdict = Literal["stable", "unstable", "inconclusive"]
SE_THRESHOLD = 3.0
N_BATCHES = 100
CHUNK = 1_000_000


@dataclass(frozen=True)
class StabilityReport:
    log_moment: float
    std_error: float
    n_samples: int
    first_order: float
    verdict: Verdict
    n_rejected: int = 0
    mean_V: float = float("nan")
    mean_R0: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "log_moment": self.log_moment,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "first_order": self.first_order,
            "verdict": self.verdict,
            "n_rejected": self.n_rejected,
            "mean_V": self.mean_V,
            "mean_R0": self.mean_R0,
        }


def verdict_for(estimate: float, se: float) -> Verdict:
    # a zero estimate with zero error is still inconclusive: the condition is strict
    if abs(estimate) <= SE_THRESHOLD * se:
        return "inconclusive"
    return "stable" if estimate < 0 else "unstable"


def batch_means_se(x: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """Standard error of the mean robust to serial correlation."""
    n = len(x)
    nb = min(n_batches, n)
    size = n // nb
    if size < 2:
        return float(np.std(x, ddof=1) / math.sqrt(n))
    means = x[: nb * size].reshape(nb, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(nb))


def estimate_log_contraction(params: ModelParams, n: int = 1_000_000, burn_in: int = 200, seed: int = 0, lnv0: float = 3.0) -> StabilityReport:
    """Average ln|1 + aV + bR_0| along a stationary (V, R_0) path.

    Exact zeros of the argument are dropped and the chain is extended until
    ``n`` usable samples exist.
    """
    if n < 10_000:
        raise ValueError(f"n must be >= 10^4, got {n}")
    if not 0 < params.vix.beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {params.vix.beta}")
    bench = simulate_benchmark(params, n + burn_in, lnv0, seed)
    V, R0 = bench.V[burn_in:], bench.R0[burn_in:]
    arg = 1.0 + params.a * V + params.b * R0
    ok = arg != 0
    rejected = int((~ok).sum())
    extension = 0
    while ok.sum() < n:
        if rejected >= n:
            raise ValueError("every sampled contraction factor is exactly zero")
        extension += 1
        # continue from the last state on a fresh derived stream
        gen = rngmod.stream(seed, rngmod.MARKET, extension)
        more = simulate_benchmark(params, n + 1, math.log(V[-1] / params.v_scale), seed, gen=gen)
        V = np.concatenate([V, more.V[1:]])
        R0 = np.concatenate([R0, more.R0[1:]])
        arg = 1.0 + params.a * V + params.b * R0
        ok = arg != 0
        rejected = int((~ok).sum())
    idx = np.flatnonzero(ok)[:n]
    logs = np.log(np.abs(arg[idx]))
    est = float(logs.mean())
    se = batch_means_se(logs)
    mV = float(V[idx].mean())
    mR = float(R0[idx].mean())
    first = params.a * mV + params.b * mR
    return StabilityReport(est, se, n, first, verdict_for(est, se), rejected, mV, mR)


def gaussian_log_moment(mu: float, rho: float, n: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo E ln|xi| for xi ~ N(mu, rho^2); returns (estimate, std error)."""
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho == 0:
        if mu == 0:
            raise ValueError("ln|0| is undefined")
        return math.log(abs(mu)), 0.0
    gen = rngmod.as_generator(seed)
    total = 0.0
    total_sq = 0.0
    count = 0
    remaining = n
    while remaining > 0:
        size = min(CHUNK, remaining)
        xi = mu + rho * gen.standard_normal(size)
        xi = xi[xi != 0]
        v = np.log(np.abs(xi))
        total += float(v.sum())
        total_sq += float((v * v).sum())
        count += len(v)
        remaining -= len(v)
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return mean, math.sqrt(var / count)


def gaussian_log_moment_quad(mu: float, rho: float) -> float:
    """Deterministic E ln|xi| by adaptive quadrature.

    Each side of 0 is mapped to y > 0 and the pieces touching the log
    singularity use QUADPACK's algebraic-logarithmic weight.
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho == 0:
        return math.log(abs(mu)) if mu != 0 else -math.inf
    norm = rho * math.sqrt(2 * math.pi)

    def side(center):
        # integral over y in (0, inf) of ln(y) * density of N(center, rho^2) at y
        pdf = lambda y: math.exp(-0.5 * ((y - center) / rho) ** 2) / norm
        hi = max(center, 0.0) + 40 * rho
        cut = min(hi, max(center, 0.0) + rho)
        val, _ = integrate.quad(pdf, 0.0, cut, weight="alg-loga", wvar=(0.0, 0.0), limit=200)
        rest, _ = integrate.quad(lambda y: math.log(y) * pdf(y), cut, hi, limit=200, epsabs=1e-14, epsrel=1e-12)
        return val + rest

    if mu - 40 * rho > 0:
        val, _ = integrate.quad(lambda x: math.log(x) * math.exp(-0.5 * ((x - mu) / rho) ** 2) / norm,
                                mu - 40 * rho, mu + 40 * rho, points=[mu], limit=200)
        return val
    if mu + 40 * rho < 0:
        return gaussian_log_moment_quad(-mu, rho)
    return side(mu) + side(-mu)


@dataclass(frozen=True)
class RegionGrid:
    mu_axis: np.ndarray
    rho_axis: np.ndarray
    values: np.ndarray
    boundary: list[tuple[float, float]]

    def rows(self):
        for i, mu in enumerate(self.mu_axis):
            for j, rho in enumerate(self.rho_axis):
                yield float(mu), float(rho), float(self.values[i, j])

    def to_csv(self, path=None) -> str:
        lines = ["mu,rho,value"]
        lines += [f"{mu!r},{rho!r},{v!r}" for mu, rho, v in self.rows()]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text

    def crossing_at_mu(self, mu: float) -> list[float]:
        """rho values where the estimate changes sign along the row nearest ``mu``."""
        i = int(np.argmin(np.abs(self.mu_axis - mu)))
        return _crossings(self.rho_axis, self.values[i, :])

    def crossing_at_rho(self, rho: float) -> list[float]:
        j = int(np.argmin(np.abs(self.rho_axis - rho)))
        return _crossings(self.mu_axis, self.values[:, j])


def _crossings(axis: np.ndarray, vals: np.ndarray) -> list[float]:
    out = []
    for k in range(len(axis) - 1):
        v0, v1 = vals[k], vals[k + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)):
            continue
        if v0 == 0:
            out.append(float(axis[k]))
        elif v0 * v1 < 0:
            out.append(float(axis[k] + (axis[k + 1] - axis[k]) * v0 / (v0 - v1)))
    if len(vals) and vals[-1] == 0:
        out.append(float(axis[-1]))
    return out


def _cell_value(mu, rho, samples, seed, i, j) -> float:
    if rho == 0 and mu == 0:
        return -math.inf
    est, _ = gaussian_log_moment(mu, rho, samples, rngmod.stream(seed, rngmod.GRID, i, j))
    return est


def stability_region(
    mu_range=(0.0, 3.0),
    rho_range=(0.0, 3.0),
    grid_n: int = 61,
    samples_per_cell: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> RegionGrid:
    """Grid of E ln|xi| estimates; ``values[i, j]`` is at (mu_axis[i], rho_axis[j]).

    The boundary collects sign changes along every rho column (a boundary mu
    for each rho) and along every mu row, linearly interpolated.  The single
    cell mu = rho = 0 holds -inf.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    mu_axis = np.linspace(mu_range[0], mu_range[1], grid_n)
    rho_axis = np.linspace(rho_range[0], rho_range[1], grid_n)
    cells = [(i, j) for i in range(grid_n) for j in range(grid_n)]
    values = np.empty((grid_n, grid_n))

    def work(cell):
        i, j = cell
        values[i, j] = _cell_value(mu_axis[i], rho_axis[j], samples_per_cell, seed, i, j)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, cells))
    else:
        for c in cells:
            work(c)

    boundary = set()
    for j, rho in enumerate(rho_axis):
        for mu in _crossings(mu_axis, values[:, j]):
            boundary.add((mu, float(rho)))
    for i, mu in enumerate(mu_axis):
        for rho in _crossings(rho_axis, values[i, :]):
            boundary.add((float(mu), rho))
    return RegionGrid(mu_axis, rho_axis, values, sorted(boundary, key=lambda p: (p[1], p[0])))
