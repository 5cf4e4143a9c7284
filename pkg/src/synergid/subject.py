"""Simulated human subject reaching with the synergistic prosthetic elbow.

Steady-state behaviour: compensation grows linearly with the synergy error
outside a flat region around ``theta_natural`` and is split between trunk
lean and shoulder protraction according to the subject's strategy. On top
of it sit motor learning (first-order approach to steady state), Gaussian
displacement noise, a post-rest warm-up decrement and optional strategy
switches.

Each reach is rendered as an IMU trial so that the measurement path is the
same as for recorded data.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from importlib import resources

import numpy as np

from .imu import (SAMPLE_RATE_HZ, PostureSeries, ReachOutcome, ReachTrial,
                  synergy_elbow_trajectory, trial_from_postures)
from .kinematics import BodyModel, ScreenTarget, Unreachable, required_trunk_pitch

REACH_DURATION = 1.5  # seconds
TRIAL_PERIOD = 4.0  # seconds between trial starts in emitted logs
SHOULDER_SWEEP = 0.8  # rad of shoulder flexion per reach, ending horizontal
THETA_LIMITS = (0.8, 2.7)


class Strategy(str, Enum):
    TRUNK_DOMINANT = "TrunkDominant"
    MIXED = "Mixed"
    SHOULDER_DOMINANT = "ShoulderDominant"


TRUNK_SHARE = {
    Strategy.TRUNK_DOMINANT: 0.9,
    Strategy.MIXED: 0.6,
    Strategy.SHOULDER_DOMINANT: 0.3,
}


@dataclass(frozen=True)
class StrategySwitch:
    iteration: int
    strategy: Strategy


@dataclass(frozen=True)
class SubjectProfile:
    body: BodyModel
    theta_natural: float
    trunk_slope: float
    shoulder_strategy: Strategy = Strategy.MIXED
    natural_protraction: float = 0.045
    learning_rate: float = 0.3
    motor_noise_sd: float = 0.0
    warmup_decrement: float = 0.0  # fraction of learning lost at a rest
    strategy_switch: StrategySwitch | None = None
    flat_region_halfwidth: float = 0.0
    novice_compensation: float = 0.15  # metres of extra compensation when unlearned
    initial_learned_fraction: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "shoulder_strategy", Strategy(self.shoulder_strategy))
        if not THETA_LIMITS[0] < self.theta_natural < THETA_LIMITS[1]:
            raise ValueError(f"theta_natural {self.theta_natural} outside {THETA_LIMITS}")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.motor_noise_sd < 0 or self.flat_region_halfwidth < 0:
            raise ValueError("motor_noise_sd and flat_region_halfwidth must be non-negative")
        if not 0 <= self.warmup_decrement <= 1:
            raise ValueError("warmup_decrement must lie in [0, 1]")
        if not 0 <= self.initial_learned_fraction <= 1:
            raise ValueError("initial_learned_fraction must lie in [0, 1]")
        if self.trunk_slope < 0 or self.novice_compensation < 0:
            raise ValueError("trunk_slope and novice_compensation must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shoulder_strategy"] = self.shoulder_strategy.value
        if self.strategy_switch is not None:
            d["strategy_switch"] = {"iteration": self.strategy_switch.iteration,
                                    "strategy": self.strategy_switch.strategy.value}
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SubjectProfile":
        data = dict(data)
        data["body"] = BodyModel(**data["body"])
        sw = data.get("strategy_switch")
        if sw is not None:
            data["strategy_switch"] = StrategySwitch(int(sw["iteration"]), Strategy(sw["strategy"]))
        return cls(**data)


@dataclass(frozen=True)
class MotorState:
    learned_fraction: float
    iterations_done: int
    rng_state: dict = field(repr=False)
    active_strategy: Strategy


def new_motor_state(profile: SubjectProfile, seed: int, learned_fraction: float | None = None) -> MotorState:
    lf = profile.initial_learned_fraction if learned_fraction is None else learned_fraction
    rng = np.random.Generator(np.random.PCG64(seed))
    return MotorState(lf, 0, rng.bit_generator.state, profile.shoulder_strategy)


def _soft_threshold(x, h):
    return math.copysign(max(abs(x) - h, 0.0), x)


def synergy_error(profile: SubjectProfile, theta: float) -> float:
    return _soft_threshold(theta - profile.theta_natural, profile.flat_region_halfwidth)


def steady_state_outcome(profile: SubjectProfile, theta: float, strategy: Strategy | None = None,
                         iteration_index: int = 0) -> ReachOutcome:
    """Displacements of a fully adapted subject at synergy ``theta``."""
    share = TRUNK_SHARE[Strategy(strategy or profile.shoulder_strategy)]
    comp = abs(synergy_error(profile, theta)) * profile.trunk_slope
    trunk = comp * share
    _check_trunk_reach(profile.body, trunk)
    return ReachOutcome(iteration_index, trunk, profile.natural_protraction + comp * (1 - share))


def _check_trunk_reach(body, trunk):
    if trunk >= body.trunk_length:
        raise Unreachable(f"trunk displacement {trunk:.3f} m exceeds trunk length")


def _lean_for(body: BodyModel, trunk: float) -> float:
    """Trunk pitch extending a straight horizontal arm by ``trunk`` metres."""
    if trunk <= 0:
        return -math.asin(min(-trunk / body.trunk_length, math.sin(math.pi / 4)))
    reach = ScreenTarget(body.arm_length + trunk, body.shoulder_height)
    return required_trunk_pitch(body, reach, 0.0, math.pi / 2, 0.0)


def minimum_jerk(n: int, duration: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Time grid, normalised position 0 -> 1 and its time derivative."""
    t = np.arange(n) / SAMPLE_RATE_HZ
    tau = t / duration
    s = tau**3 * (10 - 15 * tau + 6 * tau**2)
    ds = 30 * tau**2 * (1 - tau) ** 2 / duration
    return t, s, ds


_N_SAMPLES = int(round(REACH_DURATION * SAMPLE_RATE_HZ)) + 1
_T, _S, _DS = minimum_jerk(_N_SAMPLES, REACH_DURATION)


def perform_reach(profile: SubjectProfile, state: MotorState, theta: float) -> tuple[ReachTrial, MotorState]:
    """Simulate one reach at synergy ``theta``; returns the IMU trial and next motor state."""
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = state.rng_state
    noise = rng.standard_normal(2) * profile.motor_noise_sd

    share = TRUNK_SHARE[state.active_strategy]
    target = steady_state_outcome(profile, theta, state.active_strategy)
    extra = (1.0 - state.learned_fraction) * profile.novice_compensation
    body = profile.body
    trunk = target.trunk_disp + extra * share + noise[0]
    trunk = min(trunk, 0.99 * body.trunk_length)
    shoulder = target.shoulder_disp + extra * (1 - share) + noise[1]
    lean = _lean_for(body, trunk)
    protraction = shoulder - body.trunk_length * math.sin(lean)
    protraction = min(max(protraction, -0.05), 0.2, 0.99 * body.c7_to_acromion)

    shoulder_flexion = math.pi / 2 - SHOULDER_SWEEP * (1 - _S)
    # Elbow extends as the shoulder flexes; at theta_natural it ends straight.
    elbow = synergy_elbow_trajectory(theta, -SHOULDER_SWEEP * _DS,
                                     profile.theta_natural * SHOULDER_SWEEP,
                                     1.0 / SAMPLE_RATE_HZ).angles
    postures = PostureSeries(_T, lean * _S, protraction * _S, shoulder_flexion, elbow)
    trial = trial_from_postures(body, postures, state.iterations_done, theta,
                                time_offset=state.iterations_done * TRIAL_PERIOD)

    lf = state.learned_fraction + profile.learning_rate * (1.0 - state.learned_fraction)
    return trial, replace(state, learned_fraction=lf, iterations_done=state.iterations_done + 1,
                          rng_state=rng.bit_generator.state)


def rest_event(profile: SubjectProfile, state: MotorState) -> MotorState:
    """Warm-up decrement: part of the learned behaviour is lost over a rest."""
    return replace(state, learned_fraction=state.learned_fraction * (1.0 - profile.warmup_decrement))


def maybe_strategy_switch(profile: SubjectProfile, state: MotorState) -> MotorState:
    sw = profile.strategy_switch
    if sw is not None and state.iterations_done == sw.iteration:
        return replace(state, active_strategy=sw.strategy)
    return state


PRESETS = tuple(f"subject{i}" for i in range(1, 10))


def load_profile(name_or_path) -> SubjectProfile:
    """Load a profile from a JSON file, or a shipped preset by name."""
    path = os.fspath(name_or_path)
    if os.path.isfile(path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    elif path in PRESETS:
        data = json.loads(resources.files("synergid.presets").joinpath(f"{path}.json").read_text())
    else:
        raise FileNotFoundError(f"no profile file or preset named {path!r}")
    return SubjectProfile.from_dict(data)


def save_profile(profile: SubjectProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile.to_dict(), fh, indent=2)
        fh.write("\n")
