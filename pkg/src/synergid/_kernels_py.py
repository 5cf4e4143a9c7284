"""Pure-Python kernels. Reference implementation and fallback for ``_kernels``.

Signatures and semantics must stay identical to the Cython module.
"""
import math

import numpy as np

_HALF_PI = 0.5 * math.pi
_BISECT_STEPS = 64


def fingertip_forward(trunk_length, upper_arm, forearm, trunk_pitch,
                      protraction, shoulder_flexion, elbow_flexion):
    return (trunk_length * math.sin(trunk_pitch) + protraction
            + upper_arm * math.sin(shoulder_flexion)
            + forearm * math.sin(shoulder_flexion + elbow_flexion))


def solve_trunk_pitch(trunk_length, upper_arm, forearm, target_forward,
                      shoulder_flexion, elbow_flexion, protraction, tol):
    """Smallest pitch in [0, pi/2] bringing the fingertip to ``target_forward``.

    Returns nan when even a pitch of pi/2 leaves a gap larger than ``tol``.
    """
    arm = fingertip_forward(0.0, upper_arm, forearm, 0.0, protraction,
                            shoulder_flexion, elbow_flexion)
    if arm >= target_forward:
        return 0.0
    if arm + trunk_length < target_forward - tol:
        return math.nan
    lo, hi = 0.0, _HALF_PI
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if arm + trunk_length * math.sin(mid) < target_forward:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return hi


def synergy_integrate(rate, dt, theta, initial, lower, upper):
    """Trapezoidal ``initial + theta * cumulative integral(rate)``, clamped pointwise.

    Returns the clamped series and the number of clamped samples.
    """
    n = len(rate)
    out = np.empty(n, dtype=np.float64)
    acc = 0.0
    clamped = 0
    for i in range(n):
        if i > 0:
            acc += 0.5 * dt * (rate[i - 1] + rate[i])
        v = initial + theta * acc
        if v < lower:
            v = lower
            clamped += 1
        elif v > upper:
            v = upper
            clamped += 1
        out[i] = v
    return out, clamped


def interp_uniform(t, y, t0, dt, n):
    """Linear interpolation of (t, y) at t0 + k*dt, k < n. ``t`` strictly increasing."""
    out = np.empty(n, dtype=np.float64)
    m = len(t)
    j = 0
    for k in range(n):
        x = t0 + k * dt
        while j < m - 2 and t[j + 1] < x:
            j += 1
        t_lo = t[j]
        t_hi = t[j + 1]
        w = (x - t_lo) / (t_hi - t_lo)
        if w < 0.0:
            w = 0.0
        elif w > 1.0:
            w = 1.0
        out[k] = y[j] + w * (y[j + 1] - y[j])
    return out


def peak_displacements(trunk_length, c7_to_acromion, c7_pitch, sa_pitch, c7_ref, rel_ref):
    """Peak forward trunk and acromion displacement over a resampled trial.

    ``c7_ref`` is the upright C7 pitch and ``rel_ref`` the neutral SA-minus-C7
    pitch.
    """
    c7_0 = c7_ref
    rel_0 = rel_ref
    trunk_peak = -math.inf
    shoulder_peak = -math.inf
    for i in range(len(c7_pitch)):
        trunk = trunk_length * math.sin(c7_pitch[i] - c7_0)
        shoulder = trunk + c7_to_acromion * math.sin(sa_pitch[i] - c7_pitch[i] - rel_0)
        if trunk > trunk_peak:
            trunk_peak = trunk
        if shoulder > shoulder_peak:
            shoulder_peak = shoulder
    return trunk_peak, shoulder_peak
