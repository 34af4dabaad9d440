"""OLS with the residual diagnostics used for the size-CAPM regressions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .data import ModelDataset, _check_decile

RANK_RTOL = 1e-10
DEFAULT_LAGS = 10
MIN_MONTHS = 30


class SingularDesignError(np.linalg.LinAlgError):
    pass


class InsufficientDataError(ValueError):
    pass


class ZeroVarianceError(ValueError):
    pass


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    stderr: np.ndarray
    t_pvalues: np.ndarray
    residuals: np.ndarray
    s2: float
    s2_ci95: tuple[float, float]
    n: int
    p: int

    @property
    def dof(self) -> int:
        return self.n - self.p


def ols_fit(X, y) -> OlsFit:
    """Least squares via QR, with t-test p-values and a chi-square CI for s2.

    Raises
    ------
    InsufficientDataError
        If ``n <= p``.
    SingularDesignError
        If the smallest singular value of ``X`` is below ``1e-10`` times the largest.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if p < 1 or n <= p:
        raise InsufficientDataError(f"need n > p >= 1, got n={n}, p={p}")
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] < RANK_RTOL * sv[0] or sv[0] == 0:
        raise SingularDesignError(f"design matrix is rank deficient (singular values {sv})")

    Q, R = np.linalg.qr(X)
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    dof = n - p
    s2 = float(resid @ resid / dof)
    Rinv = np.linalg.solve(R, np.eye(p))
    cov_unscaled = Rinv @ Rinv.T
    se = np.sqrt(s2 * np.diag(cov_unscaled))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = coef / se
        pvals = 2.0 * stats.t.sf(np.abs(tstat), dof)
    zero_se = se == 0
    pvals = np.where(zero_se, np.where(coef == 0, 1.0, 0.0), pvals)
    ci = (dof * s2 / stats.chi2.ppf(0.975, dof), dof * s2 / stats.chi2.ppf(0.025, dof))
    return OlsFit(coef, se, pvals, resid, s2, (float(ci[0]), float(ci[1])), n, p)


def ljung_box_abs(residuals, lags: int = DEFAULT_LAGS) -> float:
    """Ljung-Box p-value computed on the absolute residuals."""
    x = np.abs(np.asarray(residuals, dtype=float))
    n = len(x)
    if not 1 <= lags < n:
        raise ValueError(f"need 1 <= lags < n, got lags={lags}, n={n}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("absolute residuals are constant")
    x = x - x.mean()
    denom = x @ x
    k = np.arange(1, lags + 1)
    acf = np.array([x[j:] @ x[:-j] for j in k]) / denom
    q = n * (n + 2) * np.sum(acf**2 / (n - k))
    return float(stats.chi2.sf(q, lags))


def jarque_bera(residuals) -> float:
    """Asymptotic Jarque-Bera p-value with population moments."""
    x = np.asarray(residuals, dtype=float)
    n = len(x)
    if n < 4:
        raise ValueError(f"need at least 4 observations, got {n}")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if np.ptp(x) == 0 or m2 <= 0:
        raise ZeroVarianceError("sample has zero variance")
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2
    jb = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return float(np.exp(-jb / 2.0))


@dataclass(frozen=True)
class SizeCapmFit:
    """One decile's size-CAPM regression.

    For ``kind == "premia"`` the three coefficients are the premia
    equation's intercept, size slope and size-beta slope.
    """

    decile: int
    kind: Literal["returns", "premia"]
    m_hat: float
    a_hat: float
    b_hat: float
    stderr: tuple[float, float, float]
    t_pvalues: tuple[float, float, float]
    s2: float
    s2_ci95: tuple[float, float]
    ljung_box_p: float
    jarque_bera_p: float
    n: int
    residuals: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.m_hat, self.a_hat, self.b_hat])

    def as_row(self) -> dict:
        return {
            "kind": self.kind,
            "decile": self.decile,
            "intercept": self.m_hat,
            "size_slope": self.a_hat,
            "beta_slope": self.b_hat,
            "s2": self.s2,
            "s2_ci_low": self.s2_ci95[0],
            "s2_ci_high": self.s2_ci95[1],
            "ljung_box_p": self.ljung_box_p,
            "jarque_bera_p": self.jarque_bera_p,
            "intercept_p": self.t_pvalues[0],
            "size_slope_p": self.t_pvalues[1],
            "beta_slope_p": self.t_pvalues[2],
            "n": self.n,
        }


def size_capm_design(C, bench_norm) -> np.ndarray:
    """Columns ``[1, C, C * bench / V]``."""
    C = np.asarray(C, dtype=float)
    return np.column_stack([np.ones_like(C), C, C * np.asarray(bench_norm, dtype=float)])


def _fit(kind, decile, target, bench, C, V, lags) -> SizeCapmFit:
    if len(V) < MIN_MONTHS:
        raise InsufficientDataError(f"need at least {MIN_MONTHS} months, got {len(V)}")
    y = (target - bench) / V
    X = size_capm_design(C, bench / V)
    fit = ols_fit(X, y)
    try:
        lb = ljung_box_abs(fit.residuals, lags)
    except ZeroVarianceError:
        lb = float("nan")
    try:
        jb = jarque_bera(fit.residuals)
    except ZeroVarianceError:
        jb = float("nan")
    c = fit.coefficients
    return SizeCapmFit(
        decile=decile,
        kind=kind,
        m_hat=float(c[0]),
        a_hat=float(c[1]),
        b_hat=float(c[2]),
        stderr=tuple(float(s) for s in fit.stderr),
        t_pvalues=tuple(float(p) for p in fit.t_pvalues),
        s2=fit.s2,
        s2_ci95=fit.s2_ci95,
        ljung_box_p=lb,
        jarque_bera_p=jb,
        n=fit.n,
        residuals=fit.residuals,
    )


def fit_returns_model(ds: ModelDataset, decile: int, lags: int = DEFAULT_LAGS) -> SizeCapmFit:
    """Regress ``(R_k - R_0)/V`` on ``[1, C_k, C_k R_0/V]``."""
    _check_decile(decile)
    d = ds.decile(decile)
    return _fit("returns", decile, d["R"], ds.R0, d["C"], ds.V, lags)


def fit_premia_model(ds: ModelDataset, decile: int, lags: int = DEFAULT_LAGS) -> SizeCapmFit:
    """Regress ``(P_k - P_0)/V`` on ``[1, C_k, C_k P_0/V]``."""
    _check_decile(decile)
    d = ds.decile(decile)
    return _fit("premia", decile, d["P"], ds.P0, d["C"], ds.V, lags)


def fit_all(ds: ModelDataset, lags: int = DEFAULT_LAGS) -> list[SizeCapmFit]:
    fits = [fit_returns_model(ds, k, lags) for k in range(1, 10)]
    fits += [fit_premia_model(ds, k, lags) for k in range(1, 10)]
    return fits
