import math

import numpy as np
import pytest
from scipy import optimize

from sizecapm.market import ModelParams, simulate_benchmark
from sizecapm.stability import (
    batch_means_se,
    estimate_log_contraction,
    gaussian_log_moment,
    gaussian_log_moment_quad,
    stability_region,
    verdict_for,
)
from sizecapm.volatility import GaussianParams, VixModel

EULER = 0.5772156649015329
LOG_ABS_Z = -(EULER + math.log(2)) / 2
RHO_STAR = math.exp((EULER + math.log(2)) / 2)


def test_null_coefficients_exact_zero():
    r = estimate_log_contraction(ModelParams(a=0.0, b=0.0), 10_000)
    assert r.log_moment == 0.0 and r.std_error == 0.0
    assert r.verdict == "inconclusive"
    assert r.first_order == 0.0


def test_defaults_are_stable():
    r = estimate_log_contraction(ModelParams(), 1_000_000, seed=1)
    assert r.log_moment < 0
    assert r.verdict == "stable"
    assert r.n_samples == 1_000_000


def test_first_order_flips_with_b():
    down = estimate_log_contraction(ModelParams(b=-0.1), 20_000, seed=2)
    up = estimate_log_contraction(ModelParams(b=0.1), 20_000, seed=2)
    assert up.mean_V == down.mean_V and up.mean_R0 == down.mean_R0
    assert up.first_order == -down.first_order


def test_preconditions():
    with pytest.raises(ValueError):
        estimate_log_contraction(ModelParams(), 9_999)
    with pytest.raises(ValueError):
        estimate_log_contraction(ModelParams(vix=VixModel(0.3, 1.0)), 10_000)


def test_exact_zero_samples_are_redrawn():
    # V == 1 and Z == 0 make every factor 1 + a + b g, here exactly 0
    flat = VixModel(0.0, 0.5, GaussianParams(0.0))
    p = ModelParams(vix=flat, z_sigma=0.0, g=0.5, a=-1.5, b=1.0)
    with pytest.raises(ValueError, match="exactly zero"):
        estimate_log_contraction(p, 10_000, lnv0=0.0)


def test_verdict_rule():
    assert verdict_for(-1.0, 0.1) == "stable"
    assert verdict_for(1.0, 0.1) == "unstable"
    assert verdict_for(-0.2, 0.1) == "inconclusive"
    assert verdict_for(0.0, 0.0) == "inconclusive"


def test_batch_means_iid():
    x = np.random.default_rng(0).standard_normal(100_000)
    assert batch_means_se(x) == pytest.approx(1 / math.sqrt(1e5), rel=0.2)


def test_constant_volatility_reduction():
    a, b, s = 0.02, -0.15, 0.202
    flat = VixModel(0.0, 0.5, GaussianParams(0.0))
    p = ModelParams(vix=flat, a=a, b=b, z_sigma=s)
    r = estimate_log_contraction(p, 400_000, seed=3, lnv0=0.0)
    est, se = gaussian_log_moment(1 + a + b * p.g, abs(b) * s, 400_000, seed=4)
    assert abs(r.log_moment - est) < 3 * math.hypot(r.std_error, se)
    assert gaussian_log_moment_quad(1 + a + b * p.g, abs(b) * s) == pytest.approx(r.log_moment, abs=3 * r.std_error)


def test_degenerate_gaussian():
    assert gaussian_log_moment(1.0, 0.0) == (0.0, 0.0)
    assert gaussian_log_moment(-2.0, 0.0)[0] == math.log(2)
    with pytest.raises(ValueError):
        gaussian_log_moment(1.0, -0.1)
    with pytest.raises(ValueError):
        gaussian_log_moment(0.0, 0.0)


def test_quadrature_oracle_closed_form():
    assert gaussian_log_moment_quad(0.0, 1.0) == pytest.approx(LOG_ABS_Z, abs=1e-10)
    assert gaussian_log_moment_quad(0.0, RHO_STAR) == pytest.approx(0.0, abs=1e-10)
    # large mu: ln mu - rho^2/(2 mu^2) to second order
    assert gaussian_log_moment_quad(5.0, 0.1) == pytest.approx(math.log(5) - 0.01 / 50, abs=1e-6)


def test_standard_normal_anchor():
    est, se = gaussian_log_moment(0.0, 1.0, 2_000_000, seed=5)
    assert abs(est - gaussian_log_moment_quad(0.0, 1.0)) < 4 * se


def test_zero_at_critical_rho():
    est, se = gaussian_log_moment(0.0, RHO_STAR, 1_000_000, seed=6)
    assert abs(est) < 0.005


def test_realistic_point_inside_region():
    mu, rho = 0.99, 0.03
    approx = math.log(mu) - rho**2 / (2 * mu**2)
    est, se = gaussian_log_moment(mu, rho, 1_000_000, seed=7)
    assert est < 0
    assert est == pytest.approx(approx, abs=max(4 * se, 1e-5))


@pytest.mark.parametrize("rho", [0.5, 2.0, 5.0])
def test_shift_scale_identity(rho):
    base, s0 = gaussian_log_moment(0.0, 1.0, 500_000, seed=8)
    est, s1 = gaussian_log_moment(0.0, rho, 500_000, seed=9)
    assert abs(est - (math.log(rho) + base)) < 3 * math.hypot(s0, s1)


@pytest.mark.parametrize("mu", [0.3, 1.0, 2.5])
def test_symmetry(mu):
    a, s0 = gaussian_log_moment(mu, 0.7, 500_000, seed=10)
    b, s1 = gaussian_log_moment(-mu, 0.7, 500_000, seed=11)
    assert abs(a - b) < 3 * math.hypot(s0, s1)


def test_monotone_in_mu():
    mus = np.linspace(0, 3, 7)
    vals = [gaussian_log_moment(m, 0.5, 1_000_000, seed=12)[0] for m in mus]
    assert np.all(np.diff(vals) > 0)


def test_region_small_grid():
    g = stability_region((0.0, 3.0), (0.0, 3.0), 11, 20_000, seed=0)
    assert g.values.shape == (11, 11)
    assert g.values[0, 0] == -math.inf
    assert np.isfinite(g.values[1:, :]).all() and np.isfinite(g.values[:, 1:]).all()
    (rho0,) = g.crossing_at_mu(0.0)
    assert rho0 == pytest.approx(RHO_STAR, abs=0.05)
    text = g.to_csv()
    assert text.startswith("mu,rho,value\n") and text.count("\n") == 122


def test_region_default_grid_anchors():
    g = stability_region((0.0, 3.0), (0.0, 3.0), 61, 2_000, seed=0)
    # rho = 0 column holds ln|mu| exactly and mu = 1 is a grid node
    assert g.crossing_at_rho(0.0) == [1.0]
    assert all(np.isfinite(p).all() for p in g.boundary)


def test_region_boundary_against_quadrature():
    # the boundary mu first grows like 1 + rho^2/2, peaks near rho = 0.9 and
    # then falls to 0 at RHO_STAR; check the traced points rather than a shape
    g = stability_region((0.0, 3.0), (0.0, 3.0), 16, 200_000, seed=1)
    for rho in g.rho_axis[1:10]:
        (mu,) = g.crossing_at_rho(rho)
        true_mu = optimize.brentq(lambda m: gaussian_log_moment_quad(m, rho), 0.0, 3.0)
        assert mu == pytest.approx(true_mu, abs=0.03)


def test_region_deterministic_under_threads():
    a = stability_region((0.0, 2.0), (0.0, 2.0), 6, 10_000, seed=3, workers=1)
    b = stability_region((0.0, 2.0), (0.0, 2.0), 6, 10_000, seed=3, workers=4)
    assert np.array_equal(a.values, b.values)
    assert a.boundary == b.boundary


def test_region_preconditions():
    with pytest.raises(ValueError):
        stability_region(grid_n=1)
