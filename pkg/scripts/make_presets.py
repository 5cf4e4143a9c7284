"""Regenerate the shipped subject presets.

Subjects 1-3 have ``theta_natural`` calibrated so that a noiseless default
sweep fits theta* = 1.99, 1.90 and 1.92 respectively.
"""
import os
import sys

from synergid.harness import calibrate_theta_natural
from synergid.kinematics import BodyModel
from synergid.subject import Strategy, StrategySwitch, SubjectProfile, save_profile

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "synergid", "presets")

T, M, S = Strategy.TRUNK_DOMINANT, Strategy.MIXED, Strategy.SHOULDER_DOMINANT

# name: (body, strategy, theta_natural, slope, protraction, flat, learning, noise, warm-up, lf0, switch)
SUBJECTS = {
    "subject1": ((0.52, 0.18, 0.31, 0.45), T, 1.99, 0.105, 0.045, 0.10, 0.30, 0.004, 0.2, 0.6, None),
    "subject2": ((0.49, 0.17, 0.29, 0.43), M, 1.90, 0.120, 0.050, 0.15, 0.25, 0.004, 0.5, 0.6, None),
    "subject3": ((0.50, 0.18, 0.30, 0.44), M, 1.92, 0.100, 0.040, 0.12, 0.30, 0.004, 0.1, 0.6, None),
    "subject4": ((0.55, 0.19, 0.33, 0.47), S, 2.20, 0.090, 0.050, 0.10, 0.15, 0.006, 0.2, 0.5, None),
    "subject5": ((0.47, 0.16, 0.28, 0.41), M, 1.60, 0.140, 0.055, 0.08, 0.30, 0.005, 0.2, 0.6, None),
    "subject6": ((0.53, 0.18, 0.32, 0.46), T, 2.30, 0.080, 0.045, 0.10, 0.30, 0.004, 0.2, 0.6, None),
    "subject7": ((0.51, 0.17, 0.30, 0.45), M, 1.75, 0.110, 0.050, 0.12, 0.35, 0.005, 0.2, 0.6, None),
    "subject8": ((0.48, 0.17, 0.29, 0.42), S, 2.05, 0.100, 0.040, 0.10, 0.25, 0.005, 0.2, 0.6, None),
    "subject9": ((0.50, 0.18, 0.30, 0.44), T, 1.85, 0.100, 0.050, 0.10, 0.30, 0.004, 0.2, 0.7,
                 StrategySwitch(35, S)),
}
CALIBRATED = {"subject1": 1.99, "subject2": 1.90, "subject3": 1.92}


def build(name):
    body, strat, nat, slope, prot, flat, rate, noise, w, lf0, switch = SUBJECTS[name]
    p = SubjectProfile(
        body=BodyModel(*body), theta_natural=nat, trunk_slope=slope, shoulder_strategy=strat,
        natural_protraction=prot, learning_rate=rate, motor_noise_sd=noise, warmup_decrement=w,
        strategy_switch=switch, flat_region_halfwidth=flat, novice_compensation=0.12,
        initial_learned_fraction=lf0, name=name)
    if name in CALIBRATED:
        p = calibrate_theta_natural(p, CALIBRATED[name])
    return p


def main(out=OUT):
    for name in SUBJECTS:
        p = build(name)
        save_profile(p, os.path.join(out, f"{name}.json"))
        print(f"{name}: theta_natural={p.theta_natural:.6f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
