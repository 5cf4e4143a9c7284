"""``synergid`` command line.

Exit codes: 0 success, 1 runtime error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

from . import harness
from .errors import InvalidConfig, SynergidError
from .objective import CostSpec, convexity_screen, cost_samples, fit_cost_map, read_cost_samples, write_cost_map
from .personalizer import PersonalizerConfig
from .plots import emit_cost_map_plot, emit_plots
from .imu import write_trial_log
from .subject import load_profile

DEFAULT_SEED = 0
SEED_ENV = "SYNERGID_SEED"


class ConfigError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _guard(field, fn, *args, **kwargs):
    """Run ``fn`` and turn validation failures into a ConfigError naming ``field``."""
    try:
        return fn(*args, **kwargs)
    except InvalidConfig as exc:
        raise ConfigError(f"{field}.{exc.field}" if field else exc.field, str(exc)) from None
    except (ValueError, TypeError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        raise ConfigError(field, str(exc)) from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        seed = int(env)
    except ValueError:
        raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
    if seed < 0:
        raise ConfigError(SEED_ENV, "must be non-negative")
    return seed


def _profile(spec, noise=None):
    if spec is None:
        raise ConfigError("--profile", "required")
    profile = _guard("--profile", load_profile, spec)
    if noise is not None:
        profile = _guard("--noise", replace, profile, motor_noise_sd=noise)
    return profile


def _cost_spec(alpha):
    return _guard("--alpha", CostSpec, alpha)


def _read_json(path, field):
    def load():
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("expected a JSON object")
        return data
    return _guard(field, load)


def _personalizer_config(args):
    overrides = {}
    if getattr(args, "personalizer", None):
        overrides = _read_json(args.personalizer, "--personalizer")
    if args.theta_init is not None:
        overrides["theta_init"] = args.theta_init
    base = PersonalizerConfig.calibrated().to_dict()
    base.update(overrides)
    return _guard("personalizer", PersonalizerConfig.from_dict, base)


def _protocol(args, config):
    return _guard("--rest-after", harness.PersonalizationProtocol, args.iterations, args.rest_after,
                  _cost_spec(args.alpha), config)


def _log(msg):
    print(msg, file=sys.stderr)


def cmd_sweep(args) -> list[str]:
    profile = _profile(args.profile, args.noise)
    protocol = _guard("sweep", harness.SweepProtocol, args.theta_start, args.theta_end,
                      args.theta_step, args.reps, args.order)
    seed = _seed(args)
    record, cost_map = harness.run_sweep(profile, protocol, seed, _cost_spec(args.alpha))
    stem = f"{profile.name}_sweep"
    out = [os.path.join(args.out, f"{stem}.csv")]
    out.append(record.write_csv(out[0]))
    map_csv = os.path.join(args.out, f"{profile.name}_cost_map.csv")
    samples = cost_samples([r.theta_cmd for r in record.rows], [r.cost for r in record.rows])
    out += [map_csv, write_cost_map(samples, cost_map, map_csv)]
    if args.plot:
        out += emit_plots(record, args.out, profile.name, cost_map)
    ts = "none" if cost_map.theta_star is None else f"{cost_map.theta_star:.4f}"
    _log(f"{profile.name}: theta* = {ts}, rmse = {cost_map.fit_rmse:.3g}")
    return out


def cmd_personalize(args) -> list[str]:
    profile = _profile(args.profile, args.noise)
    protocol = _protocol(args, _personalizer_config(args))
    seed = _seed(args)
    record = harness.run_personalization(profile, protocol, seed, keep_trials=True)
    stem = os.path.join(args.out, f"{profile.name}_s{seed}")
    out = [f"{stem}_run.csv"]
    out.append(record.write_csv(out[0]))
    write_trial_log(record.trials, f"{stem}_trials.csv")
    out.append(f"{stem}_trials.csv")
    if args.plot:
        out += emit_plots(record, args.out, f"{profile.name}_s{seed}")
    _log(f"{profile.name} seed {seed}: theta_hat = {record.rows[-1].theta_hat:.4f}, "
         f"steady state at {record.metadata['steady_state_iteration']}")
    return out


BATCH_KEYS = {"profiles", "seeds", "inits", "iterations", "rest_after", "alpha", "noise",
              "personalizer", "jobs"}


def cmd_batch(args) -> list[str]:
    if args.config is None:
        raise ConfigError("--config", "required")
    cfg = _read_json(args.config, "--config")
    unknown = sorted(set(cfg) - BATCH_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown batch config key")
    for key in ("profiles", "seeds", "inits"):
        if not isinstance(cfg.get(key), list) or not cfg[key]:
            raise ConfigError(key, "must be a non-empty list")
    profiles = [_profile(p, cfg.get("noise")) for p in cfg["profiles"]]
    pconf = PersonalizerConfig.calibrated().to_dict()
    pconf.update(cfg.get("personalizer", {}))
    config = _guard("personalizer", PersonalizerConfig.from_dict, pconf)
    iterations = _guard("iterations", int, cfg.get("iterations", args.iterations))
    rest_after = _guard("rest_after", int, cfg.get("rest_after", args.rest_after))
    protocol = _guard("rest_after", harness.PersonalizationProtocol, iterations, rest_after,
                      _guard("alpha", CostSpec, cfg.get("alpha", args.alpha)), config)
    seeds = _guard("seeds", lambda: [int(s) for s in cfg["seeds"]])
    inits = _guard("inits", lambda: [float(t) for t in cfg["inits"]])
    for t in inits:
        _guard("inits", replace, config, theta_init=t)
    jobs = args.jobs if args.jobs is not None else _guard("jobs", int, cfg.get("jobs", 1))
    if jobs < 1:
        raise ConfigError("jobs", "must be at least 1")

    records = harness.run_batch(profiles, seeds, inits, protocol, jobs)
    out = []
    for rec in records:
        meta = rec.metadata
        path = os.path.join(args.out, f"{meta['profile']}_s{meta['seed']}_i{meta['theta_init']:g}_run.csv")
        rec.write_csv(path)
        out.append(path)
        if args.plot:
            out += emit_plots(rec, args.out, os.path.basename(path)[:-len("_run.csv")])
    summary = harness.summarize(records)
    table = os.path.join(args.out, "batch_summary.csv")
    fields = list(harness.RunSummary.__dataclass_fields__)
    with open(table, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in summary.runs:
            w.writerow(["" if getattr(r, f) is None else getattr(r, f) for f in fields])
    with open(os.path.join(args.out, "batch_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    out += [table, os.path.join(args.out, "batch_summary.json")]
    _log(f"{len(records)} runs, {summary.fraction_converged:.0%} converged, "
         f"median steady state {summary.median_steady_state_iteration}")
    return out


def cmd_replay(args) -> list[str]:
    body = _profile(args.profile).body
    config = _personalizer_config(args) if args.estimate else None
    if not os.path.isfile(args.log):
        raise ConfigError("--log", f"no such file {args.log!r}")
    record = harness.replay(args.log, _cost_spec(args.alpha), body, config, args.zeroing)
    stem = os.path.splitext(os.path.basename(args.log))[0]
    out = [os.path.join(args.out, f"{stem}_replay.csv")]
    out.append(record.write_csv(out[0]))
    if args.plot:
        out += emit_plots(record, args.out, f"{stem}_replay")
    return out


def _samples_from(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if tuple(header) == harness.RECORD_HEADER:
        rec = harness.RunRecord.read_csv(path)
        return cost_samples(rec.column("theta_cmd"), rec.column("cost"))
    return read_cost_samples(path)


def cmd_fit_map(args) -> list[str]:
    if not os.path.isfile(args.input):
        raise ConfigError("--input", f"no such file {args.input!r}")
    samples = _samples_from(args.input)
    cost_map = fit_cost_map(samples)
    report = convexity_screen(cost_map, samples)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    path = os.path.join(args.out, f"{stem}_fit.csv")
    sidecar = write_cost_map(samples, cost_map, path)
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    meta["convexity"] = {"convex": report.convex, "interior_minimum": report.interior_minimum,
                         "noise_sd": report.noise_sd, "flat_region": report.flat_region,
                         "flat_width": report.flat_width if report.flat_width != float("inf") else None}
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    out = [path, sidecar]
    if args.plot:
        out.append(emit_cost_map_plot([s.theta for s in samples], [s.cost for s in samples],
                                      cost_map, args.out, stem))
    return out


def cmd_plot(args) -> list[str]:
    if not os.path.isfile(args.input):
        raise ConfigError("--input", f"no such file {args.input!r}")
    stem = os.path.splitext(os.path.basename(args.input))[0]
    with open(args.input, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if tuple(header) == harness.RECORD_HEADER:
        return emit_plots(harness.RunRecord.read_csv(args.input), args.out, stem)
    samples = read_cost_samples(args.input)
    theta, cost = [s.theta for s in samples], [s.cost for s in samples]
    return [emit_cost_map_plot(theta, cost, fit_cost_map(samples), args.out, stem)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synergid",
                                     description="Synergy personalisation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--plot", action="store_true", help="also write SVG plots")
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--alpha", type=float, default=0.5, help="trunk weight in the cost")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--iterations", type=int, default=80)
    run.add_argument("--rest-after", type=int, default=40)
    run.add_argument("--theta-init", type=float, default=None)
    run.add_argument("--personalizer", help="JSON file of personaliser config overrides")

    p = sub.add_parser("sweep", parents=[common], help="synergy sweep and cost-map fit")
    p.add_argument("--profile")
    p.add_argument("--noise", type=float, default=None, help="override motor noise SD (m)")
    p.add_argument("--theta-start", type=float, default=0.8)
    p.add_argument("--theta-end", type=float, default=2.7)
    p.add_argument("--theta-step", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--order", default="ascending", choices=("ascending", "random"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("personalize", parents=[common, run], help="closed-loop personalisation")
    p.add_argument("--profile")
    p.add_argument("--noise", type=float, default=None)
    p.set_defaults(func=cmd_personalize)

    p = sub.add_parser("batch", parents=[common, run], help="profiles x seeds x inits from a JSON config")
    p.add_argument("--config")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("replay", parents=[common, run], help="recompute costs from a trial log")
    p.add_argument("--log", required=True)
    p.add_argument("--profile", help="profile supplying the body model")
    p.add_argument("--zeroing", default="trial", choices=("trial", "session"))
    p.add_argument("--estimate", action="store_true", help="run the personaliser over logged costs")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("fit-map", parents=[common], help="fit a cost map to theta,cost samples")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_fit_map)

    p = sub.add_parser("plot", parents=[common], help="plot a run record or cost-map CSV")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "command", None) == "plot":
            args.plot = True
        try:
            os.makedirs(args.out, exist_ok=True)
        except OSError as exc:
            raise ConfigError("--out", str(exc)) from None
        for path in args.func(args):
            print(path)
    except ConfigError as exc:
        _log(f"synergid: config error: {exc}")
        return 2
    except (SynergidError, OSError, ValueError, RuntimeError) as exc:
        _log(f"synergid: error: {type(exc).__name__}: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
