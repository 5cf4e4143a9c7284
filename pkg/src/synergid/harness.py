"""Experiment protocols over simulated subjects or replayed logs.

Run record CSV::

    iteration,theta_cmd,theta_hat,trunk_disp_m,shoulder_disp_m,cost_m2,event

with a JSON metadata sidecar of the same stem.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import personalizer as pz
from .errors import FormatError
from .imu import extract_outcome, parse_trial_log
from .kinematics import BodyModel
from .objective import CostSpec, SynergyCostMap, cost_samples, evaluate_cost, fit_cost_map
from .subject import (SubjectProfile, maybe_strategy_switch, new_motor_state, perform_reach,
                      rest_event, steady_state_outcome)

RECORD_HEADER = ("iteration", "theta_cmd", "theta_hat", "trunk_disp_m", "shoulder_disp_m",
                 "cost_m2", "event")
FINAL_WINDOW = 10


@dataclass(frozen=True)
class SweepProtocol:
    theta_start: float = 0.8
    theta_end: float = 2.7
    theta_step: float = 0.05
    reps_per_theta: int = 5
    order: str = "ascending"  # or "random"

    def __post_init__(self):
        if not self.theta_step > 0:
            raise ValueError("theta_step must be positive")
        steps = (self.theta_end - self.theta_start) / self.theta_step
        if steps < 0 or abs(steps - round(steps)) > 1e-9:
            raise ValueError("(theta_end - theta_start) / theta_step must be a non-negative integer")
        if self.reps_per_theta < 1:
            raise ValueError("reps_per_theta must be at least 1")
        if self.order not in ("ascending", "random"):
            raise ValueError("order must be 'ascending' or 'random'")

    @property
    def thetas(self) -> np.ndarray:
        n = int(round((self.theta_end - self.theta_start) / self.theta_step)) + 1
        return np.round(self.theta_start + self.theta_step * np.arange(n), 12)

    @classmethod
    def two_hundred(cls) -> "SweepProtocol":
        """Grid extended to 2.75 so the sweep has 200 reaches."""
        return cls(theta_end=2.75)


@dataclass(frozen=True)
class PersonalizationProtocol:
    total_iterations: int = 80
    rest_after: int = 40
    cost_spec: CostSpec = field(default_factory=CostSpec)
    personalizer_config: pz.PersonalizerConfig = field(default_factory=pz.PersonalizerConfig.calibrated)
    steady_window: int = pz.STEADY_WINDOW

    def __post_init__(self):
        if not 0 < self.rest_after < self.total_iterations:
            raise ValueError("rest_after must lie strictly between 0 and total_iterations")

    @property
    def steady_tol(self) -> float:
        return 2 * self.personalizer_config.dither_amp

    def to_dict(self) -> dict:
        return {"total_iterations": self.total_iterations, "rest_after": self.rest_after,
                "cost_spec": asdict(self.cost_spec),
                "personalizer_config": self.personalizer_config.to_dict(),
                "steady_window": self.steady_window}


@dataclass(frozen=True)
class RunRow:
    iteration: int
    theta_cmd: float
    theta_hat: float
    trunk_disp: float
    shoulder_disp: float
    cost: float
    event: str = ""


@dataclass
class RunRecord:
    rows: list
    metadata: dict
    trials: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def event_iterations(self, kind: str) -> list[int]:
        return [r.iteration for r in self.rows if kind in r.event.split(";")]

    def write_csv(self, path) -> str:
        """Write rows to ``path`` and metadata to the ``.json`` sidecar; returns the sidecar path."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RECORD_HEADER)
            for r in self.rows:
                w.writerow((r.iteration, repr(r.theta_cmd), repr(r.theta_hat), repr(r.trunk_disp),
                            repr(r.shoulder_disp), repr(r.cost), r.event))
        sidecar = os.path.splitext(os.fspath(path))[0] + ".json"
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return sidecar

    @classmethod
    def read_csv(cls, path) -> "RunRecord":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != RECORD_HEADER:
                raise FormatError(f"unexpected header {header!r}", line=1)
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(RECORD_HEADER):
                    raise FormatError(f"expected {len(RECORD_HEADER)} fields", line=lineno)
                try:
                    rows.append(RunRow(int(row[0]), *(float(v) for v in row[1:6]), row[6]))
                except ValueError as exc:
                    raise FormatError(str(exc), line=lineno) from None
        sidecar = os.path.splitext(os.fspath(path))[0] + ".json"
        meta = {}
        if os.path.exists(sidecar):
            with open(sidecar, encoding="utf-8") as fh:
                meta = json.load(fh)
        return cls(rows, meta)


def config_hash(*parts) -> str:
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _sweep_order(protocol: SweepProtocol, seed: int) -> np.ndarray:
    thetas = protocol.thetas
    if protocol.order == "random":
        thetas = np.random.default_rng(seed).permutation(thetas)
    return np.repeat(thetas, protocol.reps_per_theta)


def run_sweep(profile: SubjectProfile, protocol: SweepProtocol = SweepProtocol(), seed: int = 0,
              cost_spec: CostSpec = CostSpec(), pretrained: bool = True,
              keep_trials: bool = False) -> tuple[RunRecord, SynergyCostMap]:
    """Step the synergy through the grid and fit the synergy-cost map.

    With ``pretrained`` the subject starts fully adapted, as after the
    familiarisation session that precedes a sweep.
    """
    motor = new_motor_state(profile, seed, 1.0 if pretrained else None)
    rows, trials = [], []
    for i, theta in enumerate(_sweep_order(protocol, seed)):
        theta = float(theta)
        trial, motor = perform_reach(profile, motor, theta)
        out = extract_outcome(trial, profile.body)
        cost = evaluate_cost(cost_spec, out)
        rows.append(RunRow(i, theta, theta, out.trunk_disp, out.shoulder_disp, cost))
        if keep_trials:
            trials.append(trial)
    cost_map = fit_cost_map(cost_samples([r.theta_cmd for r in rows], [r.cost for r in rows]))
    meta = {
        "kind": "sweep", "profile": profile.name, "seed": seed,
        "protocol": asdict(protocol), "cost_spec": asdict(cost_spec),
        "config_hash": config_hash(profile.to_dict(), asdict(protocol), asdict(cost_spec), pretrained),
        "cost_map": cost_map.to_dict(),
    }
    return RunRecord(rows, meta, trials), cost_map


def run_personalization(profile: SubjectProfile,
                        protocol: PersonalizationProtocol = PersonalizationProtocol(),
                        seed: int = 0, keep_trials: bool = False) -> RunRecord:
    config = protocol.personalizer_config
    state = pz.init(config)
    motor = new_motor_state(profile, seed)
    rows, trials = [], []
    for i in range(protocol.total_iterations):
        events = []
        if i == protocol.rest_after:
            motor = rest_event(profile, motor)
            events.append("rest")
        switched = maybe_strategy_switch(profile, motor)
        if switched is not motor:
            events.append("switch")
        motor = switched
        theta = pz.next_theta(state, config)
        trial, motor = perform_reach(profile, motor, theta)
        out = extract_outcome(trial, profile.body)
        cost = evaluate_cost(protocol.cost_spec, out)
        state = pz.observe_cost(state, config, cost)
        rows.append(RunRow(i, theta, state.theta_hat, out.trunk_disp, out.shoulder_disp, cost,
                           ";".join(events)))
        if keep_trials:
            trials.append(trial)
    history = [r.theta_hat for r in rows]
    ss = pz.settling_iteration(history, protocol.steady_window, protocol.steady_tol,
                               horizon=protocol.rest_after)
    meta = {
        "kind": "personalization", "profile": profile.name, "seed": seed,
        "theta_init": config.theta_init, "protocol": protocol.to_dict(),
        "config_hash": config_hash(profile.to_dict(), protocol.to_dict()),
        "steady_state_iteration": ss,
        "final_state": state.to_json(),
    }
    return RunRecord(rows, meta, trials)


def replay(log_path, cost_spec: CostSpec, body: BodyModel,
           personalizer_config: pz.PersonalizerConfig | None = None,
           zeroing: str = "trial") -> RunRecord:
    """Recompute displacements and costs from a trial log.

    ``zeroing='trial'`` references each trial to its own first samples;
    ``'session'`` uses the first samples of the first trial for every trial,
    as if sensors were never re-zeroed. With ``personalizer_config`` the
    logged costs are fed to a fresh personaliser to obtain ``theta_hat``.
    """
    if zeroing not in ("trial", "session"):
        raise ValueError("zeroing must be 'trial' or 'session'")
    trials = parse_trial_log(log_path)
    reference = None
    if zeroing == "session":
        first = trials[0]
        reference = {site: float(s.pitch[0]) for site, s in first.sites.items()}
    state = pz.init(personalizer_config) if personalizer_config else None
    rows = []
    for trial in trials:
        out = extract_outcome(trial, body, reference=reference)
        cost = evaluate_cost(cost_spec, out)
        theta_hat = math.nan
        if state is not None:
            state = pz.observe_cost(state, personalizer_config, cost)
            theta_hat = state.theta_hat
        rows.append(RunRow(trial.iteration_index, float(trial.synergy_value), theta_hat,
                           out.trunk_disp, out.shoulder_disp, cost))
    meta = {"kind": "replay", "source": os.fspath(log_path), "cost_spec": asdict(cost_spec),
            "zeroing": zeroing}
    return RunRecord(rows, meta, trials)


@dataclass(frozen=True)
class RunSummary:
    profile: str
    seed: int
    theta_init: float | None
    steady_state_iteration: int | None
    converged: bool
    final_cost: float
    final_trunk: float
    final_shoulder: float
    final_theta_hat: float


@dataclass(frozen=True)
class Summary:
    runs: tuple
    mean_steady_state_iteration: float | None
    median_steady_state_iteration: float | None
    fraction_converged: float
    mean_final_cost: float

    def to_dict(self) -> dict:
        return {"runs": [asdict(r) for r in self.runs],
                "mean_steady_state_iteration": self.mean_steady_state_iteration,
                "median_steady_state_iteration": self.median_steady_state_iteration,
                "fraction_converged": self.fraction_converged,
                "mean_final_cost": self.mean_final_cost}


def summarize(records: Sequence[RunRecord], window: int = FINAL_WINDOW) -> Summary:
    if not records:
        raise ValueError("summarize needs at least one run record")
    runs = []
    for rec in records:
        tail = rec.rows[-window:]
        ss = rec.metadata.get("steady_state_iteration")
        runs.append(RunSummary(
            profile=rec.metadata.get("profile", ""), seed=rec.metadata.get("seed", 0),
            theta_init=rec.metadata.get("theta_init"), steady_state_iteration=ss,
            converged=ss is not None,
            final_cost=float(np.mean([r.cost for r in tail])),
            final_trunk=float(np.mean([r.trunk_disp for r in tail])),
            final_shoulder=float(np.mean([r.shoulder_disp for r in tail])),
            final_theta_hat=float(tail[-1].theta_hat)))
    ss = [r.steady_state_iteration for r in runs if r.converged]
    return Summary(tuple(runs),
                   float(np.mean(ss)) if ss else None,
                   float(statistics.median(ss)) if ss else None,
                   len(ss) / len(runs),
                   float(np.mean([r.final_cost for r in runs])))


def _batch_job(args):
    profile, protocol, seed = args
    return run_personalization(profile, protocol, seed)


def run_batch(profiles: Sequence[SubjectProfile], seeds: Sequence[int], inits: Sequence[float],
              protocol: PersonalizationProtocol = PersonalizationProtocol(),
              jobs: int = 1) -> list[RunRecord]:
    """Every profile x seed x initial synergy; results in that nested order."""
    work = []
    for profile in profiles:
        for seed in seeds:
            for init in inits:
                cfg = replace(protocol.personalizer_config, theta_init=float(init))
                work.append((profile, replace(protocol, personalizer_config=cfg), int(seed)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_batch_job, work))
    return [_batch_job(w) for w in work]


def calibrate_theta_natural(profile: SubjectProfile, theta_star: float,
                            protocol: SweepProtocol = SweepProtocol(),
                            cost_spec: CostSpec = CostSpec(), tol: float = 1e-6,
                            max_iter: int = 50) -> SubjectProfile:
    """Adjust ``theta_natural`` so the noiseless sweep fit lands on ``theta_star``.

    Fitting an asymmetric grid shifts the quadratic's vertex away from the
    subject's natural synergy; this fixed-point iteration removes the shift.
    """
    thetas = np.repeat(protocol.thetas, protocol.reps_per_theta)
    p = replace(profile, theta_natural=theta_star)
    for _ in range(max_iter):
        costs = [evaluate_cost(cost_spec, steady_state_outcome(p, float(t))) for t in thetas]
        fitted = fit_cost_map(cost_samples(thetas, costs)).theta_star
        if fitted is None:
            raise ValueError("sweep map has no interior minimum; cannot calibrate")
        err = theta_star - fitted
        if abs(err) < tol:
            return p
        p = replace(p, theta_natural=p.theta_natural + err)
    raise RuntimeError("calibration did not converge")
