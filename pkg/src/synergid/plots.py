"""Figure-style SVG plots of sweep, personalisation and replay records."""
from __future__ import annotations

import os

import numpy as np

from .harness import RunRecord
from .objective import ABLE_BODIED_SHOULDER, SynergyCostMap, cost_samples, fit_cost_map
from .svgplot import BLACK, BLUE, GREY, RED, Panel, render


def synergy_displacement_svg(record: RunRecord) -> str:
    theta = record.column("theta_cmd")
    p = Panel("Synergy vs compensation", "synergy theta (rad)", "displacement (m)")
    p.scatter(theta, record.column("trunk_disp"), BLUE, "trunk", cls="trunk-point")
    p.scatter(theta, record.column("shoulder_disp"), RED, "shoulder", cls="shoulder-point")
    p.hline(0.0, BLUE, "able-bodied trunk")
    p.hline(ABLE_BODIED_SHOULDER, RED, "able-bodied shoulder")
    return render([p])


def cost_map_svg(theta, cost, cost_map: SynergyCostMap) -> str:
    theta = np.asarray(theta, dtype=float)
    p = Panel("Synergy-cost map", "synergy theta (rad)", "cost J (m^2)")
    p.scatter(theta, cost, GREY, "samples", cls="cost-point")
    lo, hi = cost_map.theta_range
    grid = np.linspace(lo, hi, 120)
    p.line(grid, cost_map(grid), BLACK, "quadratic fit", cls="fit")
    if cost_map.theta_star is None:
        p.note("no interior minimum", cls="theta-star")
    else:
        ts = cost_map.theta_star
        p.vline(ts, RED, cls="theta-star-line", dash="4,3")
        p.note(f"θ* = {ts:.4f} rad", cls="theta-star", attrs={"data-theta-star": repr(ts)})
    return render([p])


def _rest_markers(panel: Panel, record: RunRecord):
    for it in record.event_iterations("rest"):
        # Between the last pre-rest and the first post-rest iteration.
        panel.vline(it - 0.5)


def theta_cost_svg(record: RunRecord) -> str:
    it = record.column("iteration")
    top = Panel("Synergy over iterations", "iteration", "theta (rad)")
    top.line(it, record.column("theta_cmd"), GREY, "commanded", cls="theta-cmd", dash="3,2")
    top.line(it, record.column("theta_hat"), BLUE, "estimate", cls="theta-hat")
    bottom = Panel("Cost over iterations", "iteration", "cost J (m^2)")
    bottom.line(it, record.column("cost"), RED, "cost", cls="cost")
    _rest_markers(top, record)
    return render([top, bottom])


def displacement_svg(record: RunRecord) -> str:
    it = record.column("iteration")
    p = Panel("Compensation over iterations", "iteration", "displacement (m)")
    p.line(it, record.column("trunk_disp"), BLUE, "trunk", cls="trunk")
    p.line(it, record.column("shoulder_disp"), RED, "shoulder", cls="shoulder")
    _rest_markers(p, record)
    return render([p])


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def emit_plots(data, output_dir, stem: str = "", cost_map: SynergyCostMap | None = None) -> list[str]:
    """Write the SVGs that fit ``data`` (a RunRecord) into ``output_dir``.

    Sweeps give the synergy-displacement and cost-map plots; personalisation
    and replay records give the iteration plots. Returns the written paths.
    """
    if not isinstance(data, RunRecord):
        raise TypeError(f"expected a RunRecord, got {type(data).__name__}")
    if len(data) == 0:
        raise ValueError("cannot plot an empty record")
    os.makedirs(output_dir, exist_ok=True)
    prefix = f"{stem}_" if stem else ""
    out = []
    if data.metadata.get("kind") == "sweep":
        theta, cost = data.column("theta_cmd"), data.column("cost")
        if cost_map is None:
            cost_map = fit_cost_map(cost_samples(theta, cost))
        out.append(_write(os.path.join(output_dir, f"{prefix}synergy_displacement.svg"),
                          synergy_displacement_svg(data)))
        out.append(_write(os.path.join(output_dir, f"{prefix}cost_map.svg"),
                          cost_map_svg(theta, cost, cost_map)))
    else:
        out.append(_write(os.path.join(output_dir, f"{prefix}theta_cost.svg"), theta_cost_svg(data)))
        out.append(_write(os.path.join(output_dir, f"{prefix}displacements.svg"),
                          displacement_svg(data)))
    return out


def emit_cost_map_plot(theta, cost, cost_map: SynergyCostMap, output_dir, stem: str = "") -> str:
    if len(theta) == 0:
        raise ValueError("cannot plot an empty cost map")
    os.makedirs(output_dir, exist_ok=True)
    prefix = f"{stem}_" if stem else ""
    return _write(os.path.join(output_dir, f"{prefix}cost_map.svg"), cost_map_svg(theta, cost, cost_map))
