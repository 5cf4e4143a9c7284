"""IMU trial handling: synergy controller, joint-angle estimation, features, CSV logs.

Trial log CSV (one row per sample, header required)::

    iteration,timestamp_s,site,pitch_rad,roll_rad,yaw_rad,theta

Sites are C7 (trunk), SA (shoulder acromion), UA (upper arm) and LA (lower
arm). C7, SA and UA are required to estimate a posture; LA is optional.
"""
from __future__ import annotations

import csv
import io
import math
import os
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateTrial, EmptyFile, EmptySeries, FormatError, SiteMissing
from .kinematics import BodyModel, Posture

SAMPLE_RATE_HZ = 50.0
MIN_TRIAL_SPAN = 0.1  # seconds
THETA_RANGE = (0.8, 2.7)
ELBOW_LIMITS = (0.0, math.pi)
LOG_HEADER = ("iteration", "timestamp_s", "site", "pitch_rad", "roll_rad", "yaw_rad", "theta")


class Site(str, Enum):
    C7 = "C7"
    SA = "SA"
    UA = "UA"
    LA = "LA"


SITE_ORDER = (Site.C7, Site.SA, Site.UA, Site.LA)
REQUIRED_SITES = (Site.C7, Site.SA, Site.UA)


@dataclass(frozen=True)
class ImuSample:
    timestamp: float
    site: Site
    pitch: float
    roll: float = 0.0
    yaw: float = 0.0


@dataclass(frozen=True)
class SiteSeries:
    """Samples of one sensor within a trial, stored column-wise."""
    time: np.ndarray
    pitch: np.ndarray
    roll: np.ndarray
    yaw: np.ndarray

    def __len__(self):
        return len(self.time)


@dataclass
class ReachTrial:
    iteration_index: int
    synergy_value: float
    sites: dict = field(default_factory=dict)  # Site -> SiteSeries

    @classmethod
    def from_samples(cls, iteration_index: int, samples: Iterable[ImuSample],
                     synergy_value: float) -> "ReachTrial":
        grouped = defaultdict(list)
        for s in samples:
            grouped[Site(s.site)].append(s)
        sites = {}
        for site, rows in grouped.items():
            rows.sort(key=lambda r: r.timestamp)
            sites[site] = SiteSeries(
                time=np.array([r.timestamp for r in rows], dtype=float),
                pitch=np.array([r.pitch for r in rows], dtype=float),
                roll=np.array([r.roll for r in rows], dtype=float),
                yaw=np.array([r.yaw for r in rows], dtype=float),
            )
        return cls(iteration_index, synergy_value, sites)

    @property
    def samples(self) -> list[ImuSample]:
        """All samples ordered by timestamp, ties broken by site order."""
        out = []
        for site in SITE_ORDER:
            s = self.sites.get(site)
            if s is None:
                continue
            for i in range(len(s)):
                out.append(ImuSample(float(s.time[i]), site, float(s.pitch[i]),
                                     float(s.roll[i]), float(s.yaw[i])))
        rank = {site: k for k, site in enumerate(SITE_ORDER)}
        out.sort(key=lambda r: (r.timestamp, rank[r.site]))
        return out


@dataclass(frozen=True)
class ReachOutcome:
    iteration_index: int
    trunk_disp: float
    shoulder_disp: float

    def __post_init__(self):
        for name in ("trunk_disp", "shoulder_disp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and abs(v) < 1.0):
                raise ValueError(f"{name} must be finite and below 1 m in magnitude, got {v}")


@dataclass(frozen=True)
class PostureSeries:
    """Postures on a uniform time grid."""
    time: np.ndarray
    trunk_pitch: np.ndarray
    shoulder_protraction: np.ndarray
    shoulder_flexion: np.ndarray
    elbow_flexion: np.ndarray

    def __len__(self):
        return len(self.time)

    def __getitem__(self, i) -> Posture:
        return Posture(float(self.trunk_pitch[i]), float(self.shoulder_protraction[i]),
                       float(self.shoulder_flexion[i]), float(self.elbow_flexion[i]))


class ElbowTrajectory(NamedTuple):
    angles: np.ndarray
    clamped: int  # number of samples held at a joint limit


def synergy_elbow_trajectory(theta: float, shoulder_rate, initial_elbow: float, dt: float,
                             limits: tuple[float, float] = ELBOW_LIMITS) -> ElbowTrajectory:
    """Elbow angle produced by the synergy ``elbow_rate = theta * shoulder_rate``.

    ``shoulder_rate`` is uniformly sampled with period ``dt``. The integral is
    trapezoidal and the result is clamped to ``limits``.
    """
    rate = np.ascontiguousarray(shoulder_rate, dtype=float)
    if rate.size == 0:
        raise EmptySeries("shoulder rate series is empty")
    if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
        warnings.warn(f"synergy {theta} outside {THETA_RANGE}", stacklevel=2)
    angles, clamped = kernels.synergy_integrate(rate, float(dt), float(theta),
                                                float(initial_elbow), *map(float, limits))
    return ElbowTrajectory(angles, int(clamped))


def _resample_grid(trial: ReachTrial, rate_hz: float) -> tuple[float, float, int]:
    for site in REQUIRED_SITES:
        s = trial.sites.get(site)
        if s is None or len(s) == 0:
            raise SiteMissing(site.value)
        if len(s) < 2:
            raise DegenerateTrial(f"site {site.value} has fewer than 2 samples")
    used = [trial.sites[s] for s in SITE_ORDER if s in trial.sites]
    t0 = max(s.time[0] for s in used)
    t1 = min(s.time[-1] for s in used)
    if t1 - t0 < MIN_TRIAL_SPAN:
        raise DegenerateTrial(
            f"iteration {trial.iteration_index}: common span {t1 - t0:.3f} s < {MIN_TRIAL_SPAN} s")
    dt = 1.0 / rate_hz
    n = int(math.floor((t1 - t0) * rate_hz + 1e-9)) + 1
    return t0, dt, n


def _resampled(series: SiteSeries, t0, dt, n):
    return kernels.interp_uniform(np.ascontiguousarray(series.time),
                                  np.ascontiguousarray(series.pitch), t0, dt, n)


def _references(trial, reference):
    """Upright C7 pitch and neutral SA-C7 pitch for zeroing."""
    if reference is None:
        c7 = float(trial.sites[Site.C7].pitch[0])
        sa = float(trial.sites[Site.SA].pitch[0])
    else:
        c7 = float(reference[Site.C7])
        sa = float(reference[Site.SA])
    return c7, sa - c7


def joint_angles_from_trial(trial: ReachTrial, body: BodyModel, rate_hz: float = SAMPLE_RATE_HZ,
                            reference=None) -> PostureSeries:
    """Estimate the posture series of a trial on a uniform ``rate_hz`` grid.

    Trunk pitch and protraction are zeroed against the trial's first samples,
    or against ``reference`` ({Site: pitch}) when given. Shoulder flexion is the
    upper-arm pitch and elbow flexion the lower-arm minus upper-arm pitch.
    """
    t0, dt, n = _resample_grid(trial, rate_hz)
    c7 = _resampled(trial.sites[Site.C7], t0, dt, n)
    sa = _resampled(trial.sites[Site.SA], t0, dt, n)
    ua = _resampled(trial.sites[Site.UA], t0, dt, n)
    c7_ref, rel_ref = _references(trial, reference)
    trunk = c7 - c7_ref
    protraction = body.c7_to_acromion * np.sin(sa - c7 - rel_ref)
    if Site.LA in trial.sites:
        elbow = _resampled(trial.sites[Site.LA], t0, dt, n) - ua
    else:
        elbow = np.zeros(n)
    return PostureSeries(t0 + dt * np.arange(n), trunk, protraction, ua, elbow)


def extract_outcome(trial: ReachTrial, body: BodyModel, rate_hz: float = SAMPLE_RATE_HZ,
                    reference=None) -> ReachOutcome:
    """Peak forward trunk and shoulder displacement reached during the trial."""
    t0, dt, n = _resample_grid(trial, rate_hz)
    c7 = _resampled(trial.sites[Site.C7], t0, dt, n)
    sa = _resampled(trial.sites[Site.SA], t0, dt, n)
    c7_ref, rel_ref = _references(trial, reference)
    trunk, shoulder = kernels.peak_displacements(body.trunk_length, body.c7_to_acromion,
                                                 c7, sa, c7_ref, rel_ref)
    return ReachOutcome(trial.iteration_index, float(trunk), float(shoulder))


def trial_from_postures(body: BodyModel, postures: PostureSeries, iteration_index: int,
                        synergy_value: float, time_offset: float = 0.0,
                        mounting: dict | None = None) -> ReachTrial:
    """Forward sensor model: the IMU pitches a posture series would produce.

    ``mounting`` adds a constant pitch offset per site.
    """
    ratio = np.asarray(postures.shoulder_protraction) / body.c7_to_acromion
    if np.any(np.abs(ratio) > 1.0):
        raise ValueError("protraction exceeds the C7-acromion link length")
    mounting = mounting or {}
    c7 = np.asarray(postures.trunk_pitch, dtype=float)
    pitches = {
        Site.C7: c7,
        Site.SA: c7 + np.arcsin(ratio),
        Site.UA: np.asarray(postures.shoulder_flexion, dtype=float),
        Site.LA: np.asarray(postures.shoulder_flexion) + np.asarray(postures.elbow_flexion),
    }
    t = np.asarray(postures.time, dtype=float) + time_offset
    zeros = np.zeros_like(t)
    sites = {site: SiteSeries(t, p + mounting.get(site, 0.0), zeros, zeros)
             for site, p in pitches.items()}
    return ReachTrial(iteration_index, synergy_value, sites)


def _open_text(source, mode):
    if isinstance(source, (str, os.PathLike)):
        return open(source, mode, newline="", encoding="utf-8"), True
    return source, False


def parse_trial_log(source) -> list[ReachTrial]:
    """Read a trial log (path or text stream) into trials ordered by iteration."""
    fh, owned = _open_text(source, "r")
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyFile()
        if tuple(h.strip() for h in header) != LOG_HEADER:
            raise FormatError(f"unexpected header {header!r}", line=1)
        rows = defaultdict(lambda: defaultdict(list))
        thetas = {}
        last_time = {}
        count = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LOG_HEADER):
                raise FormatError(f"expected {len(LOG_HEADER)} fields, got {len(row)}", line=lineno)
            try:
                it = int(row[0])
                ts = float(row[1])
                site = Site(row[2].strip())
                pitch, roll, yaw, theta = (float(v) for v in row[3:])
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno) from None
            if it < 0:
                raise FormatError("negative iteration index", line=lineno)
            if not all(math.isfinite(v) for v in (ts, pitch, roll, yaw, theta)):
                raise FormatError("non-finite value", line=lineno)
            if not -math.pi <= pitch <= math.pi:
                raise FormatError(f"pitch {pitch} outside [-pi, pi]", line=lineno)
            key = (it, site)
            if key in last_time and ts <= last_time[key]:
                raise FormatError(f"timestamp not increasing for site {site.value}", line=lineno)
            last_time[key] = ts
            if thetas.setdefault(it, theta) != theta:
                raise FormatError(f"theta changes within iteration {it}", line=lineno)
            rows[it][site].append((ts, pitch, roll, yaw))
            count += 1
        if count == 0:
            raise EmptyFile()
    finally:
        if owned:
            fh.close()
    trials = []
    for it in sorted(rows):
        sites = {}
        for site, data in rows[it].items():
            arr = np.array(data, dtype=float)
            sites[site] = SiteSeries(arr[:, 0].copy(), arr[:, 1].copy(),
                                     arr[:, 2].copy(), arr[:, 3].copy())
        trials.append(ReachTrial(it, thetas[it], sites))
    return trials


def write_trial_log(trials: Iterable[ReachTrial], dest) -> None:
    """Write trials in the trial-log format. Floats use ``repr``, so the log is lossless."""
    fh, owned = _open_text(dest, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for trial in trials:
            theta = repr(float(trial.synergy_value))
            for s in trial.samples:
                w.writerow((trial.iteration_index, repr(s.timestamp), s.site.value,
                            repr(s.pitch), repr(s.roll), repr(s.yaw), theta))
    finally:
        if owned:
            fh.close()


def trial_log_text(trials: Iterable[ReachTrial]) -> str:
    buf = io.StringIO()
    write_trial_log(trials, buf)
    return buf.getvalue()
