"""Compensation-motion cost and the synergy-cost map."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDesign, FormatError, InsufficientData
from .imu import ReachOutcome

DEFAULT_ALPHA = 0.5
ABLE_BODIED_SHOULDER = 0.04  # metres, mean able-bodied acromion displacement


@dataclass(frozen=True)
class CostSpec:
    alpha: float = DEFAULT_ALPHA
    target_trunk: float = 0.0
    target_shoulder: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")

    @classmethod
    def able_bodied(cls, alpha: float = DEFAULT_ALPHA) -> "CostSpec":
        return cls(alpha, 0.0, ABLE_BODIED_SHOULDER)


@dataclass(frozen=True)
class CostSample:
    theta: float
    cost: float
    iteration_index: int = 0

    def __post_init__(self):
        if not self.cost >= 0:
            raise ValueError(f"cost must be non-negative, got {self.cost}")


@dataclass(frozen=True)
class SynergyCostMap:
    """Quadratic fit ``J(theta) = a2*theta**2 + a1*theta + a0``.

    ``theta_star`` is None when the fit has no minimum inside ``theta_range``.
    """
    a2: float
    a1: float
    a0: float
    theta_star: float | None
    fit_rmse: float
    theta_range: tuple[float, float]

    @property
    def no_interior_minimum(self) -> bool:
        return self.theta_star is None

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return (self.a2 * theta + self.a1) * theta + self.a0

    def to_dict(self) -> dict:
        return {"a2": self.a2, "a1": self.a1, "a0": self.a0, "theta_star": self.theta_star,
                "fit_rmse": self.fit_rmse}


def evaluate_cost(spec: CostSpec, outcome: ReachOutcome) -> float:
    dt = spec.target_trunk - outcome.trunk_disp
    ds = spec.target_shoulder - outcome.shoulder_disp
    return spec.alpha * dt * dt + (1.0 - spec.alpha) * ds * ds


def fit_cost_map(samples: Sequence[CostSample]) -> SynergyCostMap:
    """Ordinary least-squares quadratic through every (theta, cost) sample."""
    if len(samples) < 3:
        raise InsufficientData(f"need at least 3 samples, got {len(samples)}")
    theta = np.array([s.theta for s in samples], dtype=float)
    cost = np.array([s.cost for s in samples], dtype=float)
    if len(np.unique(theta)) < 3:
        raise DegenerateDesign("quadratic fit needs at least 3 distinct theta values")

    # Fit in centred, scaled coordinates for conditioning, then expand.
    centre = theta.mean()
    scale = max(np.abs(theta - centre).max(), 1e-12)
    u = (theta - centre) / scale
    design = np.column_stack([u * u, u, np.ones_like(u)])
    (b2, b1, b0), *_ = np.linalg.lstsq(design, cost, rcond=None)
    if abs(b2) <= 1e-12 * max(np.abs(cost).max(), 1e-300):
        b2 = 0.0  # curvature below float resolution: the data are a line
    a2 = b2 / scale**2
    a1 = b1 / scale - 2.0 * a2 * centre
    a0 = b0 - b1 * centre / scale + a2 * centre**2

    residual = cost - design @ np.array([b2, b1, b0])
    rmse = float(math.sqrt(np.mean(residual**2)))
    lo, hi = float(theta.min()), float(theta.max())
    theta_star = None
    if b2 > 0:
        candidate = centre - scale * b1 / (2.0 * b2)
        if lo <= candidate <= hi:
            theta_star = float(candidate)
    return SynergyCostMap(float(a2), float(a1), float(a0), theta_star, rmse, (lo, hi))


@dataclass(frozen=True)
class ConvexityReport:
    convex: bool
    interior_minimum: bool
    noise_sd: float
    flat_region: tuple[float, float] | None
    flat_width: float

    @property
    def passed(self) -> bool:
        return self.convex and self.interior_minimum


def convexity_screen(cost_map: SynergyCostMap, samples: Sequence[CostSample] = (),
                     noise_sd: float | None = None) -> ConvexityReport:
    """Check the map is usable for personalisation and measure its flat region.

    The flat region is where the fitted cost lies within one noise standard
    deviation of its minimum. The noise level defaults to the fit RMSE; with
    ``samples`` given it is recomputed from their residuals.
    """
    if noise_sd is None:
        if samples:
            th = np.array([s.theta for s in samples], dtype=float)
            c = np.array([s.cost for s in samples], dtype=float)
            noise_sd = float(np.sqrt(np.mean((c - cost_map(th)) ** 2)))
        else:
            noise_sd = cost_map.fit_rmse
    convex = cost_map.a2 > 0
    interior = cost_map.theta_star is not None
    if convex and interior:
        half = math.sqrt(noise_sd / cost_map.a2)
        ts = cost_map.theta_star
        return ConvexityReport(True, True, noise_sd, (ts - half, ts + half), 2.0 * half)
    return ConvexityReport(convex, interior, noise_sd, None, math.inf if not convex else 0.0)


def cost_samples(thetas: Iterable[float], costs: Iterable[float], start: int = 0) -> list[CostSample]:
    return [CostSample(float(t), float(c), start + i) for i, (t, c) in enumerate(zip(thetas, costs))]


def write_cost_map(samples: Sequence[CostSample], cost_map: SynergyCostMap, csv_path) -> str:
    """Write ``theta,cost`` rows and a JSON sidecar next to ``csv_path``.

    Returns the sidecar path.
    """
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("theta", "cost"))
        for s in samples:
            w.writerow((repr(s.theta), repr(s.cost)))
    sidecar = os.path.splitext(os.fspath(csv_path))[0] + ".json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(cost_map.to_dict(), fh, indent=2)
        fh.write("\n")
    return sidecar


def read_cost_samples(csv_path) -> list[CostSample]:
    out = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"theta", "cost"} <= set(reader.fieldnames):
            raise FormatError("expected columns theta,cost", line=1)
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(CostSample(float(row["theta"]), float(row["cost"]), lineno - 2))
            except (TypeError, ValueError) as exc:
                raise FormatError(str(exc), line=lineno) from None
    return out
