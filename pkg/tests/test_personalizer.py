import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synergid import personalizer as pz
from synergid.errors import InvalidConfig, NonFiniteCost

PUBLISHED = pz.PersonalizerConfig.published()
CAL = pz.PersonalizerConfig.calibrated()


def test_published_values():
    assert PUBLISHED.omega0 == pytest.approx(math.pi / 4)
    assert (PUBLISHED.dither_amp, PUBLISHED.gain, PUBLISHED.hp_coeff) == (0.06, 0.0008, 0.1)
    assert PUBLISHED.estimator_gain == (0.3840, 0.6067, -0.2273, -0.8977, -1.0302)
    assert PUBLISHED.gain_mode == "fixed"


def test_init():
    s = pz.init(pz.PersonalizerConfig.published(theta_init=1.5))
    assert s.theta_hat == 1.5 and s.iteration == 0 and s.cost_window == ()


@pytest.mark.parametrize("field,value", [("dither_amp", 0.0), ("hp_coeff", 1.0), ("gain", -1.0),
                                         ("theta_init", 0.8), ("estimator_gain", (1, 2)),
                                         ("gain_mode", "auto"), ("blend", 1.5)])
def test_invalid_config(field, value):
    with pytest.raises(InvalidConfig) as info:
        pz.PersonalizerConfig(**{field: value})
    assert info.value.field == field


def test_from_dict_unknown_key():
    with pytest.raises(InvalidConfig) as info:
        pz.PersonalizerConfig.from_dict({"gian": 1.0})
    assert info.value.field == "gian"
    assert pz.PersonalizerConfig.from_dict(CAL.to_dict()) == CAL


def test_next_theta():
    s = pz.init(CAL)
    assert pz.next_theta(s, CAL) == CAL.theta_init
    s2 = pz.PersonalizerState(theta_hat=1.5, iteration=2)
    assert pz.next_theta(s2, CAL) == pytest.approx(1.56, abs=1e-15)
    top = pz.PersonalizerState(theta_hat=2.7, iteration=2)
    assert pz.next_theta(top, CAL) == 2.7


def test_fir_gain_at_dither():
    h = pz.fir_response(pz.PUBLISHED_ESTIMATOR_GAIN, math.pi / 4)
    assert abs(h) == pytest.approx(2.5155, abs=1e-3)


@pytest.mark.parametrize("config", [PUBLISHED, CAL])
def test_constant_cost_no_drift(config):
    s = pz.init(config)
    for _ in range(50):
        s = pz.observe_cost(s, config, 0.004)
    assert s.gradient_estimate == 0.0
    assert s.theta_hat == config.theta_init


def test_quadratic_oracle_from_1_3():
    cfg = pz.PersonalizerConfig.calibrated(theta_init=1.3)
    s = pz.run_static(lambda t: (t - 1.9) ** 2, cfg, 60)
    assert abs(s.theta_hat - 1.9) < 0.05


def test_window_and_history_lengths():
    s = pz.run_static(lambda t: (t - 2.0) ** 2, CAL, 30)
    assert len(s.cost_window) == pz.WINDOW
    assert len(s.theta_history) == 30 and s.iteration == 30


def test_observe_rejects_bad_costs():
    s = pz.init(CAL)
    for bad in (math.nan, math.inf):
        with pytest.raises(NonFiniteCost):
            pz.observe_cost(s, CAL, bad)
    with pytest.raises(ValueError):
        pz.observe_cost(s, CAL, -1e-3)


def test_detect_steady_state():
    flat = pz.PersonalizerState(1.5, theta_history=(1.5,) * 10)
    assert pz.detect_steady_state(flat)
    tol = 0.12
    ramp = pz.PersonalizerState(1.5, theta_history=tuple(1.0 + tol / 2 * i for i in range(10)))
    assert not pz.detect_steady_state(ramp, 10, tol)
    short = pz.PersonalizerState(1.5, theta_history=(1.5,) * 9)
    assert not pz.detect_steady_state(short)
    with pytest.raises(ValueError):
        pz.detect_steady_state(flat, window=1)


def test_settling_iteration():
    hist = [1.0 + 0.1 * i for i in range(10)] + [2.0] * 20
    assert pz.settling_iteration(hist, 10, 0.12) == 19
    assert pz.settling_iteration([1.5] * 12) == 10
    assert pz.settling_iteration(list(np.linspace(0, 3, 30))) is None
    assert pz.settling_iteration([1.5] * 5) is None


costs = st.lists(st.one_of(st.floats(0, 1e12), st.sampled_from([0.0, 1e-300, 5e-324, 1e300])),
                 min_size=1, max_size=120)


@pytest.mark.parametrize("config", [PUBLISHED, CAL, pz.PersonalizerConfig(gain=1e6)])
@given(stream=costs)
@settings(max_examples=80, deadline=None)
def test_bounds_safety(config, stream):
    s = pz.init(config)
    for c in stream:
        cmd = pz.next_theta(s, config)
        assert config.theta_min <= cmd <= config.theta_max
        s = pz.observe_cost(s, config, c)
        assert config.theta_min <= s.theta_hat <= config.theta_max
        assert math.isfinite(s.gradient_estimate) or math.isinf(s.gradient_estimate)
    assert config.theta_min <= pz.next_theta(s, config) <= config.theta_max


def test_determinism():
    rng = np.random.default_rng(9)
    stream = rng.uniform(0, 0.01, 100)

    def run():
        s = pz.init(CAL)
        trace = []
        for c in stream:
            s = pz.observe_cost(s, CAL, c)
            trace.append((s.theta_hat, s.gradient_estimate, s.hp_state))
        return trace
    assert run() == run()


def test_cost_scaling_scales_gradient():
    rng = np.random.default_rng(4)
    stream = rng.uniform(0, 0.01, 40)
    a, b = pz.init(PUBLISHED), pz.init(PUBLISHED)
    c = 7.5
    for x in stream:
        a = pz.observe_cost(a, PUBLISHED, x)
        b = pz.observe_cost(b, PUBLISHED, c * x)
        assert b.gradient_estimate == pytest.approx(c * a.gradient_estimate, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("c", [0.01, 1.0, 100.0])
def test_normalized_gain_scale_invariant(c):
    base = pz.run_static(lambda t: (t - 2.2) ** 2, CAL, 80)
    scaled = pz.run_static(lambda t: c * (t - 2.2) ** 2, CAL, 80)
    assert scaled.theta_hat == pytest.approx(base.theta_hat, abs=1e-9)


@pytest.mark.parametrize("ts", [1.2, 1.9, 2.5])
def test_envelope_non_increasing(ts):
    s = pz.run_static(lambda t: 0.1 * (t - ts) ** 2, CAL, 120)
    err = np.abs(np.array(s.theta_history) - ts)
    env = np.maximum.accumulate(err[::-1])[::-1]
    burn = 8
    assert np.all(np.diff(env[burn:]) <= 0)
    assert env[-20] < 0.05


def test_checkpoint_resume():
    f = lambda t: (t - 2.0) ** 2  # noqa: E731
    full = pz.run_static(f, CAL, 40)
    half = pz.run_static(f, CAL, 20)
    resumed = pz.PersonalizerState.from_json(half.to_json())
    assert resumed == half
    for _ in range(20):
        resumed = pz.observe_cost(resumed, CAL, f(pz.next_theta(resumed, CAL)))
    assert resumed == full


def test_custom_estimator():
    calls = []

    def zero(state, config, xi, window):
        calls.append(len(window))
        return 0.0
    s = pz.init(CAL)
    for c in (0.1, 0.2, 0.3):
        s = pz.observe_cost(s, CAL, c, estimator=zero)
    assert s.theta_hat == CAL.theta_init and calls == [1, 2, 3]


def test_blend_extremes_use_single_route():
    direct = pz.PersonalizerConfig.calibrated(blend=1.0)
    fir = pz.PersonalizerConfig.calibrated(blend=0.0)
    stream = np.random.default_rng(2).uniform(0, 0.01, 12)
    a, b = pz.init(direct), pz.init(fir)
    for x in stream:
        a, b = pz.observe_cost(a, direct, x), pz.observe_cost(b, fir, x)
    xi = a.cost_window[-1][1]
    assert a.gradient_estimate == pytest.approx(xi * pz.dither(direct, 11) / 0.06)
    assert b.gradient_estimate != a.gradient_estimate


def test_rounding_jitter_ignored():
    rng = np.random.default_rng(0)
    s = pz.init(CAL)
    for _ in range(80):
        s = pz.observe_cost(s, CAL, 1e-3 * (1 + 1e-14 * rng.standard_normal()))
    assert s.theta_hat == CAL.theta_init
