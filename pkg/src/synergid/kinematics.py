"""Planar (sagittal) rigid-link upper-body model.

Chain: seat pivot -> C7 (trunk link, pitched forward by ``trunk_pitch``) ->
acromion (forward prismatic protraction) -> elbow -> fingertip.

Arm angles are world-frame, matching what a pitch sensor on each segment
reports: ``shoulder_flexion`` is the upper-arm elevation from hanging
(0) to horizontal forward (pi/2), and the forearm points at
``shoulder_flexion + elbow_flexion`` from the downward vertical.

Forward coordinates are measured from the upright acromion position, so a
screen's ``forward_distance`` and the fingertip's forward coordinate share an
origin. Heights are measured from the seat pivot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .errors import Unreachable

HAND_LENGTH_MARGIN = 0.08  # fingertip-to-wrist offset used to place the screen
PITCH_TOL = 1e-6  # metres, forward residual of required_trunk_pitch


@dataclass(frozen=True)
class BodyModel:
    trunk_length: float
    c7_to_acromion: float
    upper_arm_length: float
    forearm_plus_hand_length: float

    def __post_init__(self):
        for name in ("trunk_length", "c7_to_acromion", "upper_arm_length",
                     "forearm_plus_hand_length"):
            v = getattr(self, name)
            if not (0.0 < v < 2.0):
                raise ValueError(f"{name} must be in (0, 2) m, got {v}")
        if self.arm_length <= 0.3:
            raise ValueError("upper_arm_length + forearm_plus_hand_length must exceed 0.3 m")

    @property
    def arm_length(self) -> float:
        return self.upper_arm_length + self.forearm_plus_hand_length

    @property
    def shoulder_height(self) -> float:
        return self.trunk_length

    def to_dict(self) -> dict:
        return {
            "trunk_length": self.trunk_length,
            "c7_to_acromion": self.c7_to_acromion,
            "upper_arm_length": self.upper_arm_length,
            "forearm_plus_hand_length": self.forearm_plus_hand_length,
        }


@dataclass(frozen=True)
class Posture:
    trunk_pitch: float = 0.0
    shoulder_protraction: float = 0.0
    shoulder_flexion: float = 0.0
    elbow_flexion: float = 0.0

    def __post_init__(self):
        if not (-math.pi / 4 <= self.trunk_pitch <= math.pi / 2):
            raise ValueError(f"trunk_pitch {self.trunk_pitch} outside [-pi/4, pi/2]")
        if not (0.0 <= self.elbow_flexion <= math.pi):
            raise ValueError(f"elbow_flexion {self.elbow_flexion} outside [0, pi]")
        if not (-0.05 <= self.shoulder_protraction <= 0.20):
            raise ValueError(
                f"shoulder_protraction {self.shoulder_protraction} outside [-0.05, 0.20] m")


@dataclass(frozen=True)
class ScreenTarget:
    forward_distance: float
    height: float

    def __post_init__(self):
        if not self.forward_distance > 0:
            raise ValueError("forward_distance must be positive")


def trunk_displacement(body: BodyModel, posture: Posture) -> float:
    """Forward translation of C7 relative to upright."""
    return body.trunk_length * math.sin(posture.trunk_pitch)


def shoulder_displacement(body: BodyModel, posture: Posture) -> float:
    """Forward translation of the acromion: trunk lean plus protraction."""
    return trunk_displacement(body, posture) + posture.shoulder_protraction


def fingertip_position(body: BodyModel, posture: Posture) -> tuple[float, float]:
    """(forward, height) of the fingertip in metres."""
    p = posture
    forward = kernels.fingertip_forward(
        body.trunk_length, body.upper_arm_length, body.forearm_plus_hand_length,
        p.trunk_pitch, p.shoulder_protraction, p.shoulder_flexion, p.elbow_flexion)
    height = (body.trunk_length * math.cos(p.trunk_pitch)
              - body.upper_arm_length * math.cos(p.shoulder_flexion)
              - body.forearm_plus_hand_length * math.cos(p.shoulder_flexion + p.elbow_flexion))
    return forward, height


def screen_for_subject(body: BodyModel, hand_length_margin: float = HAND_LENGTH_MARGIN) -> ScreenTarget:
    """Screen at the wrist of the straight arm held horizontally forward."""
    return ScreenTarget(forward_distance=body.arm_length - hand_length_margin,
                        height=body.shoulder_height)


def required_trunk_pitch(body: BodyModel, target: ScreenTarget, elbow_flexion: float,
                         shoulder_flexion: float, protraction: float) -> float:
    """Smallest non-negative trunk pitch closing the forward gap to ``target``.

    Raises Unreachable if no pitch up to pi/2 closes it.
    """
    pitch = kernels.solve_trunk_pitch(
        body.trunk_length, body.upper_arm_length, body.forearm_plus_hand_length,
        target.forward_distance, shoulder_flexion, elbow_flexion, protraction, PITCH_TOL)
    if math.isnan(pitch):
        raise Unreachable(
            f"target at {target.forward_distance:.3f} m cannot be reached with trunk pitch <= pi/2")
    return pitch
