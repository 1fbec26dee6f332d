"""Named benchmark scenarios, runnable end to end with expected outcomes.

Five bundled scenarios exercise the whole toolchain on one shared
parameter family. ``fig1``/``fig2``/``fig3`` integrate the same parameter
set from three different starting states, reaching three different
attractors (strain-one endemic without the first competitor, the first
competitor alone, and strain-one endemic coexistence). ``fig4`` is the
basin-geometry pipeline: grid classification, boundary bisection, and
surface fitting on a bistable configuration. ``fig5`` is a small-capacity
configuration whose disease-free coexistence point is the attractor.

Each reproduction writes its data files plus a plain-text summary of the
computed-versus-expected comparison, and returns the same numbers as a
dict. Outputs contain no timestamps or machine state, so reruns are
byte-identical.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basin import (
    boundary_edge_segments,
    classify_grid,
    fit_surface,
    probe_surface_sides,
    separatrix_points,
    write_grid_csv,
    write_points_csv,
    write_surface_lattice_csv,
    write_surface_obj,
)
from .equilibria import catalog, compute_equilibrium
from .integrate import IntegrationConfig, integrate, write_trajectory_csv
from .model import ModelParameters
from .stability import classify

__all__ = [
    "FigurePreset",
    "PRESETS",
    "FIG3_REFERENCE_ENDPOINT",
    "reproduce",
    "FIGURE_NAMES",
]

# Shared parameter family for the trajectory scenarios.
_BASE = ModelParameters(
    s=0.4, L=1.5, a=0.3, r=0.7, K=2.0, b=0.7,
    lam=0.7, beta=0.2, psi=0.2, phi=0.7, mu=0.5, nu=0.9, e=0.2, f=0.2,
)

# Bistable configuration for the basin pipeline. Only the first strain is
# active on the analysed slice (the second stays extinct there), so the
# strain-two rates are carried over unchanged from the base family.
_BASIN = ModelParameters(
    s=0.3, L=1.5, a=0.2, r=0.7, K=3.0, b=0.5,
    lam=0.6, beta=0.2, psi=0.8, phi=0.7, mu=0.3, nu=0.9, e=0.2, f=0.2,
)

# Small-capacity configuration where disease-free coexistence attracts.
_SMALL = ModelParameters(
    s=0.4, L=0.5, a=0.3, r=0.7, K=1.0, b=0.7,
    lam=0.7, beta=0.2, psi=0.2, phi=0.7, mu=0.5, nu=0.9, e=0.2, f=0.2,
)

# Independently reported endpoint for the fig3 scenario, kept for
# regression comparison. It disagrees with the exact closed form by up to
# ~2.2% in the infected component; the closed form satisfies the
# fixed-point equations exactly, so the discrepancy is flagged in the
# summary rather than adopted.
FIG3_REFERENCE_ENDPOINT = (0.2828, 1.0760, 0.2441, 0.0)


@dataclass(frozen=True)
class FigurePreset:
    """One named scenario: parameters, start state, expected attractor."""

    name: str
    params: ModelParameters
    start: tuple[float, float, float, float] | None
    target_id: str
    tolerance: float
    description: str


PRESETS: dict[str, FigurePreset] = {
    "fig1": FigurePreset(
        name="fig1",
        params=_BASE,
        start=(0.0, 1.8, 0.1, 0.1),
        target_id="E4",
        tolerance=1e-3,
        description="first competitor absent, strain one becomes endemic",
    ),
    "fig2": FigurePreset(
        name="fig2",
        params=_BASE,
        start=(1.7, 0.8, 0.1, 0.1),
        target_id="E1",
        tolerance=1e-3,
        description="first competitor wins, second goes extinct with its strains",
    ),
    "fig3": FigurePreset(
        name="fig3",
        params=_BASE,
        start=(0.1, 1.8, 0.1, 0.1),
        target_id="E6",
        tolerance=1e-3,
        description="coexistence with strain one endemic, strain two extinct",
    ),
    "fig4": FigurePreset(
        name="fig4",
        params=_BASIN,
        start=None,
        target_id="E3",
        tolerance=1e-2,
        description="basin geometry of the bistable exclusion/endemic pair",
    ),
    "fig5": FigurePreset(
        name="fig5",
        params=_SMALL,
        start=(0.1, 0.9, 0.0, 0.0),
        target_id="E3",
        tolerance=1e-6,
        description="small capacities: disease-free coexistence attracts",
    ),
}

FIGURE_NAMES = tuple(PRESETS)

_FIG4_BOUNDS = ((0.0, 2.0), (0.0, 3.0), (0.0, 2.5))


def _write_summary(outdir: Path, lines: list[str]) -> None:
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")


def _reproduce_trajectory(preset: FigurePreset, outdir: Path, config: IntegrationConfig) -> dict:
    target = compute_equilibrium(preset.params, preset.target_id)
    traj = integrate(preset.params, preset.start, config)
    with open(outdir / "trajectory.csv", "w") as fh:
        write_trajectory_csv(traj, fh)
    final = traj.final_state
    gap = float(np.max(np.abs(final - target.coordinates)))
    ok = gap <= preset.tolerance

    lines = [
        f"scenario {preset.name}: {preset.description}",
        f"start state: {tuple(preset.start)}",
        f"termination: {traj.termination} at t = {traj.final_time:.6g} "
        f"({len(traj)} accepted steps)",
        "final state: (" + ", ".join(f"{v:.10g}" for v in final) + ")",
        f"expected attractor {preset.target_id}: ("
        + ", ".join(f"{v:.10g}" for v in target.coordinates)
        + ")",
        f"max abs deviation: {gap:.3e} (tolerance {preset.tolerance:g}): "
        + ("PASS" if ok else "FAIL"),
    ]
    summary = {
        "name": preset.name,
        "termination": traj.termination,
        "t_end": traj.final_time,
        "final_state": [float(v) for v in final],
        "target_id": preset.target_id,
        "target": [float(v) for v in target.coordinates],
        "max_deviation": gap,
        "tolerance_met": ok,
    }

    if preset.name == "fig3":
        ref = np.asarray(FIG3_REFERENCE_ENDPOINT)
        nonzero = ref != 0.0
        rel = np.zeros_like(ref)
        rel[nonzero] = np.abs(final[nonzero] - ref[nonzero]) / ref[nonzero]
        worst = float(np.max(rel))
        closed_vs_ref = np.zeros_like(ref)
        closed_vs_ref[nonzero] = (
            np.abs(target.coordinates[nonzero] - ref[nonzero]) / ref[nonzero]
        )
        lines.append(
            "reference endpoint: (" + ", ".join(f"{v:.10g}" for v in ref) + ")"
        )
        lines.append(
            "relative deviation from reference per nonzero component: "
            + ", ".join(f"{v:.4%}" for v in rel[nonzero])
        )
        lines.append(
            f"NOTE: the reference endpoint disagrees with the exact closed-form "
            f"equilibrium by up to {float(np.max(closed_vs_ref)):.2%}; the closed "
            f"form satisfies the fixed-point equations exactly, so the reference "
            f"values appear to be an under-converged or rounded snapshot"
        )
        summary["reference"] = [float(v) for v in ref]
        summary["reference_relative_deviation"] = [float(v) for v in rel[nonzero]]
        summary["reference_max_relative_deviation"] = worst

    if preset.name == "fig5":
        verdict = classify(preset.params, "E3")
        lines.append(
            f"E3 classification: {verdict.classification}, eigenvalue real parts: "
            + ", ".join(f"{z.real:.6g}" for z in verdict.eigenvalues)
        )
        summary["e3_class"] = verdict.classification

    _write_summary(outdir, lines)
    return summary


def _reproduce_basin(
    preset: FigurePreset,
    outdir: Path,
    config: IntegrationConfig,
    resolution: int = 21,
    n_probes: int = 100,
    probe_offset: float = 0.05,
) -> dict:
    t0 = time.perf_counter()
    params = preset.params
    verdicts = {eq_id: classify(params, eq_id) for eq_id in ("E1", "E3", "E4")}
    attractors = [compute_equilibrium(params, "E1"), compute_equilibrium(params, "E4")]

    grid = classify_grid(
        params, _FIG4_BOUNDS, resolution, attractors, config=config
    )
    with open(outdir / "labels.csv", "w") as fh:
        write_grid_csv(grid, fh)

    # Bisect exactly the corner pairs of the grid cells the boundary
    # crosses. The exclusion basin here is a small pocket near the
    # strain-free competitor corner, so fixed full-length segments would
    # waste almost all their runs on single-basin lines.
    segments = boundary_edge_segments(grid, diagonals=True)
    sample = separatrix_points(params, segments, attractors, config=config)
    with open(outdir / "boundary_points.csv", "w") as fh:
        write_points_csv(sample, grid.slice, fh)

    model = fit_surface(sample.points, graph_axis=2)
    with open(outdir / "surface.obj", "w") as fh:
        write_surface_obj(model, fh)
    with open(outdir / "surface_lattice.csv", "w") as fh:
        write_surface_lattice_csv(model, fh)

    # The saddle sits on the boundary with its strain-one component zero,
    # so the fitted graph should vanish over its in-plane position.
    saddle = compute_equilibrium(params, "E3")
    saddle_plane = (float(saddle.coordinates[0]), float(saddle.coordinates[1]))
    saddle_gap = abs(float(model.evaluate(saddle_plane)) - float(saddle.coordinates[2]))

    # Orient the two sides of the fitted graph by majority vote over the
    # segments aligned with the graph axis (their low end is below).
    above_votes: Counter = Counter()
    below_votes: Counter = Counter()
    for seg, (lo, hi) in zip(sample.segments, sample.side_labels):
        if abs(seg[1, 2] - seg[0, 2]) > 1e-12:
            above_votes[hi] += 1
            below_votes[lo] += 1
    if not above_votes:
        above_votes = Counter(hi for _, hi in sample.side_labels)
        below_votes = Counter(lo for lo, _ in sample.side_labels)
    above = above_votes.most_common(1)[0][0]
    below = below_votes.most_common(1)[0][0]
    matches, total = probe_surface_sides(
        params,
        model,
        attractors,
        expected_above=above,
        expected_below=below,
        n_probes=n_probes,
        offset=probe_offset,
        rng=np.random.default_rng(20260814),
        config=config,
    )
    side_fraction = matches / total
    runtime = time.perf_counter() - t0

    lines = [
        f"scenario {preset.name}: {preset.description}",
        "stability: "
        + "; ".join(
            f"{eq_id} {v.classification} (lead Re {v.lead_real_part:.6g})"
            for eq_id, v in verdicts.items()
        ),
        f"grid: {grid.labels.size} nodes at resolution {resolution}, "
        f"undecided fraction {grid.undecided_fraction:.4f}",
        f"boundary: {len(sample.points)} points from {len(segments)} "
        f"opposite-basin cell corner pairs ({len(sample.skipped)} skipped)",
        f"surface fit residual: {model.fit_residual:.3e}",
        f"graph value over the saddle: {saddle_gap:.3e} "
        f"(saddle at {saddle_plane} with zero infected component)",
        f"side-consistency probes: {matches}/{total} = {side_fraction:.4f} "
        f"at offset {probe_offset:g}",
    ]
    _write_summary(outdir, lines)

    return {
        "name": preset.name,
        "stability": {k: v.classification for k, v in verdicts.items()},
        "grid_nodes": int(grid.labels.size),
        "undecided_fraction": grid.undecided_fraction,
        "n_boundary_points": int(len(sample.points)),
        "n_segments": len(segments),
        "n_skipped": len(sample.skipped),
        "fit_residual": model.fit_residual,
        "saddle_gap": saddle_gap,
        "side_matches": matches,
        "side_total": total,
        "side_fraction": side_fraction,
        "runtime_seconds": runtime,
    }


def reproduce(
    name: str,
    outdir: str | Path,
    config: IntegrationConfig | None = None,
    **basin_options,
) -> dict:
    """Run one named scenario, writing its outputs under ``outdir``.

    ``basin_options`` (resolution, n_probes, probe_offset) only apply to
    the basin scenario.
    """
    preset = PRESETS.get(name)
    if preset is None:
        raise ValueError(f"unknown scenario {name!r}; expected one of {FIGURE_NAMES}")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = config or IntegrationConfig()
    if preset.start is None:
        return _reproduce_basin(preset, out, cfg, **basin_options)
    if basin_options:
        raise ValueError(f"options {sorted(basin_options)} only apply to fig4")
    return _reproduce_trajectory(preset, out, cfg)
