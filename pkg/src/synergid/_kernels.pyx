# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, NAN, INFINITY

cnp.import_array()

cdef double _HALF_PI = 1.5707963267948966
cdef int _BISECT_STEPS = 64


cdef inline double _forward(double trunk_length, double upper_arm, double forearm,
                            double trunk_pitch, double protraction,
                            double shoulder_flexion, double elbow_flexion) nogil:
    return (trunk_length * sin(trunk_pitch) + protraction
            + upper_arm * sin(shoulder_flexion)
            + forearm * sin(shoulder_flexion + elbow_flexion))


def fingertip_forward(double trunk_length, double upper_arm, double forearm,
                      double trunk_pitch, double protraction,
                      double shoulder_flexion, double elbow_flexion):
    return _forward(trunk_length, upper_arm, forearm, trunk_pitch, protraction,
                    shoulder_flexion, elbow_flexion)


def solve_trunk_pitch(double trunk_length, double upper_arm, double forearm,
                      double target_forward, double shoulder_flexion,
                      double elbow_flexion, double protraction, double tol):
    cdef double arm = _forward(0.0, upper_arm, forearm, 0.0, protraction,
                               shoulder_flexion, elbow_flexion)
    cdef double lo = 0.0, hi = _HALF_PI, mid
    cdef int i
    if arm >= target_forward:
        return 0.0
    if arm + trunk_length < target_forward - tol:
        return NAN
    with nogil:
        for i in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if arm + trunk_length * sin(mid) < target_forward:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
    return hi


def synergy_integrate(const double[::1] rate, double dt, double theta,
                      double initial, double lower, double upper):
    cdef Py_ssize_t n = rate.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc = 0.0, v
    cdef long clamped = 0
    with nogil:
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
    return out_arr, clamped


def interp_uniform(const double[::1] t, const double[::1] y, double t0,
                   double dt, Py_ssize_t n):
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m = t.shape[0], j = 0, k
    cdef double x, w
    with nogil:
        for k in range(n):
            x = t0 + k * dt
            while j < m - 2 and t[j + 1] < x:
                j += 1
            w = (x - t[j]) / (t[j + 1] - t[j])
            if w < 0.0:
                w = 0.0
            elif w > 1.0:
                w = 1.0
            out[k] = y[j] + w * (y[j + 1] - y[j])
    return out_arr


def peak_displacements(double trunk_length, double c7_to_acromion,
                       const double[::1] c7_pitch, const double[::1] sa_pitch,
                       double c7_ref, double rel_ref):
    cdef Py_ssize_t i, n = c7_pitch.shape[0]
    cdef double c7_0 = c7_ref
    cdef double rel_0 = rel_ref
    cdef double trunk, shoulder
    cdef double trunk_peak = -INFINITY, shoulder_peak = -INFINITY
    with nogil:
        for i in range(n):
            trunk = trunk_length * sin(c7_pitch[i] - c7_0)
            shoulder = trunk + c7_to_acromion * sin(sa_pitch[i] - c7_pitch[i] - rel_0)
            if trunk > trunk_peak:
                trunk_peak = trunk
            if shoulder > shoulder_peak:
                shoulder_peak = shoulder
    return trunk_peak, shoulder_peak
