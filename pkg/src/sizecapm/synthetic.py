"""Synthetic decile panels generated from the size-CAPM regressions.

Used when the real French/FRED snapshot is unavailable: sizes, returns,
VIX and T-bill files are simulated so that every decile obeys the returns
and premia regressions exactly, with chosen coefficients and N(0, 1) noise.
"""
from __future__ import annotations

import numpy as np

from . import rng as rngmod
from .data import DecilePanel, MonthKey, MonthlyPanel, MonthlySeries, month_range
from .volatility import VixModel, draw_innovation_parts, log_vix_path

# (m, a, b) per decile 1..9 for the returns regression
RETURNS_TABLE = {
    1: (-0.0567, -0.0116, -0.1179),
    2: (-0.3286, -0.0371, -0.0686),
    3: (-0.5481, -0.0506, -0.1110),
    4: (-0.5446, -0.0447, -0.1092),
    5: (-0.5646, -0.0433, -0.1708),
    6: (-0.0486, 0.0074, -0.1446),
    7: (-0.9318, -0.0836, -0.1661),
    8: (0.7978, -0.0761, -0.1745),
    9: (-0.6832, -0.0688, -0.0437),
}
# (M, A, B) per decile 1..9 for the premia regression
PREMIA_TABLE = {
    1: (-0.1215, -0.0178, 0.1151),
    2: (-0.2832, -0.0330, -0.0714),
    3: (-0.4680, -0.0446, -0.1113),
    4: (-0.4739, -0.0402, -0.1128),
    5: (-0.4215, -0.0339, -0.1703),
    6: (0.1443, 0.0137, -0.1464),
    7: (-0.8078, -0.0746, -0.1559),
    8: (-0.6793, -0.0671, -0.1784),
    9: (-0.6596, -0.0672, -0.0432),
}

START = MonthKey(1990, 1)


def synthetic_panel(
    T: int = 405,
    seed: int = 0,
    returns_coef: dict | None = None,
    premia_coef: dict | None = None,
    g: float = 0.062,
    G: float = 0.07,
    z_sigma: float = 0.202,
    vix_model: VixModel = VixModel(),
    lnv0: float = 3.0,
    riskfree_pct: float = 3.0,
    start: MonthKey = START,
) -> MonthlyPanel:
    """Monthly panel of T months whose regressions hold exactly.

    V is VIX/100; the benchmark normalized return is ``g + z_sigma * U`` with
    U standard normal.  Relative sizes start at ``-0.4 * (10 - k)`` and
    evolve by ``C(t+1) - C(t) = R_k(t) - R_0(t)``.
    """
    returns_coef = RETURNS_TABLE if returns_coef is None else returns_coef
    premia_coef = PREMIA_TABLE if premia_coef is None else premia_coef
    gen = rngmod.stream(seed, rngmod.MARKET)
    Y, Gm = draw_innovation_parts(vix_model.innovation, gen, T)
    vix = np.exp(log_vix_path(vix_model, vix_model.innovation.combine(Y, Gm), lnv0))
    V = vix / 100.0
    x0 = g + z_sigma * gen.standard_normal(T)
    xp0 = G + z_sigma * gen.standard_normal(T)
    R0 = V * x0
    eps = gen.standard_normal((T, 9))
    delta = gen.standard_normal((T, 9))

    rf_month = np.log1p(riskfree_pct / 100.0) / 12.0
    log_size = np.empty((T + 1, 10))
    log_size[0, 9] = np.log(20000.0)
    log_size[1:, 9] = log_size[0, 9] + np.cumsum(R0)
    P = np.empty((T, 10))
    P[:, 9] = V * xp0
    R = np.empty((T, 10))
    R[:, 9] = R0
    for k in range(1, 10):
        m, a, b = returns_coef[k]
        M, A, B = premia_coef[k]
        C = np.empty(T + 1)
        C[0] = -0.4 * (10 - k)
        Rk = np.empty(T)
        for t in range(T):
            y = m + a * C[t] + b * C[t] * x0[t] + eps[t, k - 1]
            Rk[t] = R0[t] + V[t] * y
            C[t + 1] = C[t] + Rk[t] - R0[t]
        R[:, k - 1] = Rk
        Ck = C[:-1]
        P[:, k - 1] = P[:, 9] + V * (M + A * Ck + B * Ck * xp0 + delta[:, k - 1])
        log_size[:, k - 1] = log_size[:, 9] + C

    sizes = np.exp(log_size[:T])
    price_pct = 100.0 * np.expm1(R)
    total_pct = 100.0 * np.expm1(P + rf_month)
    keys = tuple(month_range(start, _advance(start, T - 1)))
    deciles = DecilePanel(keys, sizes, price_pct, total_pct)
    return MonthlyPanel(
        deciles,
        MonthlySeries(keys, vix, "vix"),
        MonthlySeries(keys, np.full(T, riskfree_pct), "riskfree"),
    )


def _advance(key: MonthKey, months: int) -> MonthKey:
    idx = key.index() + months
    return MonthKey(idx // 12, idx % 12 + 1)
