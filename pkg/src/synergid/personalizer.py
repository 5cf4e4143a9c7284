"""Iteration-domain extremum-seeking personaliser for the synergy parameter.

Each iteration commands ``theta_hat + a*sin(omega0*i)`` and observes the cost
of the resulting reach. The cost is high-passed, correlated with the dither
to estimate the local gradient, and ``theta_hat`` descends that estimate.

Two gradient routes are blended (``blend`` is the weight of the first):

* direct demodulation of the high-passed cost;
* a 5-tap FIR (``estimator_gain``, newest sample first) over the high-passed
  cost window, demodulated and normalised by the FIR gain at the dither
  frequency.

The estimator is a plain callable, so another law can be passed to
:func:`observe_cost` without touching callers.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidConfig, NonFiniteCost

PUBLISHED_ESTIMATOR_GAIN = (0.3840, 0.6067, -0.2273, -0.8977, -1.0302)
WINDOW = 5
HISTORY_LEN = 512
STEADY_WINDOW = 10
# Normalised-gain step, tuned on the simulated subjects (see README).
CALIBRATED_GAIN = 0.06
GAIN_MODES = ("fixed", "normalized")
RELATIVE_NOISE_FLOOR = 1e-9


@dataclass(frozen=True)
class PersonalizerConfig:
    omega0: float = math.pi / 4
    dither_amp: float = 0.06
    gain: float = 0.0008
    hp_coeff: float = 0.1
    estimator_gain: tuple = PUBLISHED_ESTIMATOR_GAIN
    theta_min: float = 0.8
    theta_max: float = 2.7
    theta_init: float = 1.75
    blend: float = 0.5
    gain_mode: str = "fixed"
    rms_forgetting: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "estimator_gain", tuple(float(v) for v in self.estimator_gain))
        self.validate()

    def validate(self):
        if not math.isfinite(self.omega0):
            raise InvalidConfig("omega0", "must be finite")
        if not self.dither_amp > 0:
            raise InvalidConfig("dither_amp", f"must be positive, got {self.dither_amp}")
        if not self.gain > 0:
            raise InvalidConfig("gain", f"must be positive, got {self.gain}")
        if not 0 < self.hp_coeff < 1:
            raise InvalidConfig("hp_coeff", f"must lie in (0, 1), got {self.hp_coeff}")
        if len(self.estimator_gain) != WINDOW:
            raise InvalidConfig("estimator_gain", f"needs exactly {WINDOW} entries")
        if not self.theta_min < self.theta_init < self.theta_max:
            raise InvalidConfig("theta_init",
                                f"{self.theta_init} not inside ({self.theta_min}, {self.theta_max})")
        if not 0 <= self.blend <= 1:
            raise InvalidConfig("blend", "must lie in [0, 1]")
        if self.gain_mode not in GAIN_MODES:
            raise InvalidConfig("gain_mode", f"must be one of {GAIN_MODES}")
        if not 0 < self.rms_forgetting < 1:
            raise InvalidConfig("rms_forgetting", "must lie in (0, 1)")

    @property
    def theta_bounds(self) -> tuple[float, float]:
        return self.theta_min, self.theta_max

    @classmethod
    def published(cls, **overrides) -> "PersonalizerConfig":
        """Published tuning, raw fixed gain."""
        return cls(**overrides)

    @classmethod
    def calibrated(cls, **overrides) -> "PersonalizerConfig":
        """Published dither/filter/estimator values with the normalised gain."""
        params = {"gain": CALIBRATED_GAIN, "gain_mode": "normalized"}
        params.update(overrides)
        return cls(**params)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimator_gain"] = list(self.estimator_gain)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "PersonalizerConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(sorted(unknown)[0], "unknown personaliser config key")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfig("config", str(exc)) from None


@dataclass(frozen=True)
class PersonalizerState:
    theta_hat: float
    iteration: int = 0
    hp_state: float | None = None  # low-passed cost; None until the first observation
    cost_window: tuple = ()  # last WINDOW (theta_cmd, high-passed cost), oldest first
    gradient_estimate: float = 0.0
    converged: bool = False
    xi_power: float | None = None  # running mean square of the high-passed cost
    theta_history: tuple = field(default=(), repr=False)  # theta_hat after each update

    def to_json(self) -> str:
        d = asdict(self)
        d["cost_window"] = [list(p) for p in self.cost_window]
        d["theta_history"] = list(self.theta_history)
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "PersonalizerState":
        d = json.loads(text)
        d["cost_window"] = tuple(tuple(p) for p in d["cost_window"])
        d["theta_history"] = tuple(d["theta_history"])
        return cls(**d)


GradientEstimator = Callable[[PersonalizerState, PersonalizerConfig, float, tuple], float]


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def init(config: PersonalizerConfig) -> PersonalizerState:
    config.validate()
    return PersonalizerState(theta_hat=config.theta_init)


def dither(config: PersonalizerConfig, iteration: int) -> float:
    return math.sin(config.omega0 * iteration)


def next_theta(state: PersonalizerState, config: PersonalizerConfig) -> float:
    """Synergy commanded at the current iteration."""
    raw = state.theta_hat + config.dither_amp * dither(config, state.iteration)
    return _clamp(raw, config.theta_min, config.theta_max)


def fir_response(taps: Sequence[float], omega: float) -> complex:
    """Frequency response of ``y_i = sum_m taps[m] * x_{i-m}``."""
    return sum(c * cmath.exp(-1j * omega * m) for m, c in enumerate(taps))


def dither_fir_estimator(state: PersonalizerState, config: PersonalizerConfig, xi: float,
                         window: tuple) -> float:
    """Blend of direct demodulation and the FIR route (once the window is full)."""
    s = dither(config, state.iteration)
    direct = xi * s / config.dither_amp
    if len(window) < WINDOW:
        return direct
    newest_first = [w[1] for w in reversed(window)]
    fir = sum(c * x for c, x in zip(config.estimator_gain, newest_first))
    norm = abs(fir_response(config.estimator_gain, config.omega0))
    fir_grad = fir * s / (config.dither_amp * norm) if norm > 0 else 0.0
    return config.blend * direct + (1.0 - config.blend) * fir_grad


def observe_cost(state: PersonalizerState, config: PersonalizerConfig, cost: float,
                 estimator: GradientEstimator = dither_fir_estimator) -> PersonalizerState:
    """Consume the cost measured at the commanded synergy and step ``theta_hat``."""
    cost = float(cost)
    if not math.isfinite(cost):
        raise NonFiniteCost(f"cost {cost} at iteration {state.iteration}")
    if cost < 0:
        raise ValueError(f"cost must be non-negative, got {cost}")

    hp = cost if state.hp_state is None else state.hp_state
    xi = cost - hp
    hp = hp + config.hp_coeff * xi

    window = (state.cost_window + ((next_theta(state, config), xi),))[-WINDOW:]
    grad = estimator(state, config, xi, window)

    beta = config.rms_forgetting
    power = xi * xi if state.xi_power is None else beta * state.xi_power + (1 - beta) * xi * xi
    if config.gain_mode == "normalized":
        # Cost wiggles at rounding level carry no gradient information.
        floor = RELATIVE_NOISE_FLOOR * abs(hp)
        k_eff = config.gain * config.dither_amp / math.sqrt(power) if power > floor * floor else 0.0
    else:
        k_eff = config.gain
    step = k_eff * grad
    if not math.isfinite(step):
        step = 0.0
    theta_hat = _clamp(state.theta_hat - step, config.theta_min, config.theta_max)

    history = (state.theta_history + (theta_hat,))[-HISTORY_LEN:]
    new = replace(state, theta_hat=theta_hat, iteration=state.iteration + 1, hp_state=hp,
                  cost_window=window, gradient_estimate=grad, xi_power=power,
                  theta_history=history)
    return replace(new, converged=detect_steady_state(new, STEADY_WINDOW, 2 * config.dither_amp))


def detect_steady_state(state: PersonalizerState, window: int = STEADY_WINDOW,
                        tol: float = 0.12) -> bool:
    """True when theta_hat moved less than ``tol`` over the last ``window`` iterations."""
    if window < 2:
        raise ValueError("window must be at least 2")
    hist = state.theta_history
    if len(hist) < window:
        return False
    recent = hist[-window:]
    return max(recent) - min(recent) < tol


def settling_iteration(theta_history: Sequence[float], window: int = STEADY_WINDOW,
                       tol: float = 0.12, horizon: int | None = None) -> int | None:
    """Iterations completed when the steady-state test starts holding for good.

    Only the first ``horizon`` entries are considered. Returns None if the test
    does not hold at the horizon.
    """
    h = np.asarray(theta_history[:horizon] if horizon is not None else theta_history, dtype=float)
    if len(h) < window:
        return None
    spans = np.array([np.ptp(h[j - window + 1:j + 1]) for j in range(window - 1, len(h))])
    ok = spans < tol
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    first_good = 0 if bad.size == 0 else bad[-1] + 1
    return int(first_good + window)


def run_static(cost_fn: Callable[[float], float], config: PersonalizerConfig,
               iterations: int) -> PersonalizerState:
    """Close the loop on a time-invariant cost map; returns the final state."""
    state = init(config)
    for _ in range(iterations):
        state = observe_cost(state, config, cost_fn(next_theta(state, config)))
    return state
