import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synergid.errors import DegenerateDesign, FormatError, InsufficientData
from synergid.imu import ReachOutcome
from synergid.objective import (CostSample, CostSpec, convexity_screen, cost_samples, evaluate_cost,
                                fit_cost_map, read_cost_samples, write_cost_map)

disp = st.floats(-0.9, 0.9, allow_nan=False)
alphas = st.floats(0.01, 0.99)


def outcome(t, s):
    return ReachOutcome(0, t, s)


def test_cost_examples():
    spec = CostSpec()
    assert evaluate_cost(spec, outcome(0, 0)) == 0
    assert evaluate_cost(spec, outcome(0.1, 0.1)) == pytest.approx(0.01)
    assert evaluate_cost(spec, outcome(0.2, 0.0)) == pytest.approx(0.02)
    able = CostSpec.able_bodied()
    assert evaluate_cost(able, outcome(0.0, 0.04)) == 0


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_alpha_bounds(alpha):
    with pytest.raises(ValueError):
        CostSpec(alpha)


@given(alphas, disp, disp, disp, disp)
def test_cost_nonnegative_and_zero_iff_on_target(alpha, t, s, tt, ts):
    spec = CostSpec(alpha, tt, ts)
    j = evaluate_cost(spec, outcome(t, s))
    assert j >= 0
    if t == tt and s == ts:
        assert j == 0
    if t != tt or s != ts:
        # both weights are strictly positive, so any residual shows up
        assert j > 0 or (t - tt) ** 2 < 1e-300 and (s - ts) ** 2 < 1e-300


@given(disp, disp)
def test_cost_symmetric_at_half(t, s):
    spec = CostSpec(0.5)
    assert evaluate_cost(spec, outcome(t, s)) == evaluate_cost(spec, outcome(s, t))


def test_fit_exact_quadratic():
    th = np.linspace(0.8, 2.7, 39)
    m = fit_cost_map(cost_samples(th, (th - 1.9) ** 2))
    assert m.theta_star == pytest.approx(1.9, abs=1e-12)
    assert m.fit_rmse < 1e-14


@given(st.floats(0.001, 10), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=60)
def test_fit_recovers_coefficients(a2, a1, a0):
    th = np.repeat(np.linspace(0.8, 2.7, 39), 5)
    m = fit_cost_map([_Raw(t, (a2 * t + a1) * t + a0) for t in th])
    for got, want in ((m.a2, a2), (m.a1, a1), (m.a0, a0)):
        assert abs(got - want) <= 1e-9 * max(abs(want), 1.0)


class _Raw:
    """Sample without the non-negativity check, for arbitrary polynomials."""
    def __init__(self, theta, cost):
        self.theta, self.cost = float(theta), float(cost)


@given(st.floats(1e-3, 1e3))
@settings(max_examples=30)
def test_theta_star_scale_invariant(c):
    rng = np.random.default_rng(3)
    th = np.repeat(np.linspace(0.8, 2.7, 39), 5)
    cost = 0.01 * (th - 2.1) ** 2 + rng.uniform(0, 1e-3, th.size)
    base = fit_cost_map(cost_samples(th, cost)).theta_star
    scaled = fit_cost_map(cost_samples(th, c * cost)).theta_star
    assert scaled == pytest.approx(base, abs=1e-9)


def test_descending_line_has_no_interior_minimum():
    th = np.linspace(0.8, 2.7, 20)
    m = fit_cost_map(cost_samples(th, 3.0 - th))
    assert m.no_interior_minimum and m.theta_star is None
    assert not convexity_screen(m).convex


def test_minimum_outside_range_flagged():
    th = np.linspace(0.8, 1.5, 10)
    assert fit_cost_map(cost_samples(th, (th - 2.0) ** 2)).theta_star is None


def test_fit_errors():
    with pytest.raises(InsufficientData):
        fit_cost_map(cost_samples([1, 2], [0, 1]))
    with pytest.raises(DegenerateDesign):
        fit_cost_map(cost_samples([1, 1, 2, 2], [0, 1, 1, 0]))


def test_convexity_zero_noise():
    th = np.linspace(0.8, 2.7, 39)
    rep = convexity_screen(fit_cost_map(cost_samples(th, 0.5 * (th - 1.9) ** 2)), noise_sd=0.0)
    assert rep.passed and rep.flat_width == 0.0


def test_convexity_width_from_noise():
    th = np.linspace(0.8, 2.7, 39)
    m = fit_cost_map(cost_samples(th, 0.02 * (th - 1.9) ** 2))
    sigma = 1e-4
    rep = convexity_screen(m, noise_sd=sigma)
    assert rep.flat_width == pytest.approx(2 * math.sqrt(sigma / 0.02), rel=1e-9)
    lo, hi = rep.flat_region
    assert m(lo) - m(1.9) == pytest.approx(sigma, rel=1e-6)


def test_convexity_noise_from_samples():
    rng = np.random.default_rng(0)
    th = np.repeat(np.linspace(0.8, 2.7, 39), 5)
    samples = cost_samples(th, 0.02 * (th - 1.9) ** 2 + 0.01 + rng.normal(0, 2e-4, th.size))
    rep = convexity_screen(fit_cost_map(samples), samples)
    assert rep.noise_sd == pytest.approx(2e-4, rel=0.15)


def test_cost_map_csv_round_trip(tmp_path):
    th = np.linspace(1, 2, 5)
    samples = cost_samples(th, (th - 1.5) ** 2 + 1 / 3)
    m = fit_cost_map(samples)
    sidecar = write_cost_map(samples, m, tmp_path / "map.csv")
    back = read_cost_samples(tmp_path / "map.csv")
    assert [(s.theta, s.cost) for s in back] == [(s.theta, s.cost) for s in samples]
    assert (tmp_path / "map.json").exists() and sidecar.endswith("map.json")


def test_read_cost_samples_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,2\n")
    with pytest.raises(FormatError):
        read_cost_samples(p)
    p.write_text("theta,cost\n1,2\n1.5,oops\n")
    with pytest.raises(FormatError) as info:
        read_cost_samples(p)
    assert info.value.line == 3
