"""Command-line front end: solve, sweep, limit, report.

Every command loads a YAML configuration, runs the corresponding
pipeline, and writes CSV/JSON/SVG files into the output directory.  All
CSV and JSON output is byte-deterministic for identical inputs; SVG
files carry a timestamp unless --no-timestamp is given (tests use it to
compare bytes).  Exit codes are a stable contract: 0 success, 1 solver
failure, 2 input error, 3 I/O error.
"""

import argparse
import dataclasses
import datetime
import json
import os
import sys

import numpy as np

from motorlab import analysis, serialize, svgplot
from motorlab.config_io import load_config
from motorlab.discretize import Grid, sweep_grid_cells
from motorlab.errors import InputError, SolverError
from motorlab.hj_limit import (
    hj_residual,
    limit_bounded,
    limit_piecewise,
    limit_strong,
    limit_vanishing_bounds,
)
from motorlab.model import Regime, check_assumptions, decompose_regions
from motorlab.phase import check_flux_bounds, pairwise_gap
from motorlab.steady_solver import continuation_sweep, ladder_sigmas

OUT_DIR_ENV = "MOTORLAB_OUT"

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INPUT = 2
EXIT_IO = 3


# --- argument handling ------------------------------------------------------


def _parse_sigmas(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"could not parse sigma list {text!r}: {exc}")
    if not values:
        raise InputError("sigma list is empty")
    if any(v <= 0.0 for v in values):
        raise InputError("all sigma values must be positive")
    if len(set(values)) != len(values):
        raise InputError("sigma values must be distinct")
    return sorted(values, reverse=True)


def _positive_float(text):
    v = float(text)
    if v <= 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="motorlab",
        description="Steady states of switching drift-diffusion systems, "
                    "their small-noise phase functions, and limit profiles.",
        epilog=f"The {OUT_DIR_ENV} environment variable sets the default "
               "output directory (falls back to the working directory).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sigma=False, sigmas=False, epsilon=False):
        p.add_argument("--config", required=True,
                       help="path to a YAML configuration file")
        p.add_argument("--grid", type=int, default=None, metavar="N",
                       help="number of grid cells (default: resolution "
                            "contract max(512, ceil(8/sigma_min)))")
        p.add_argument("--out", default=None, metavar="DIR",
                       help=f"output directory (default: ${OUT_DIR_ENV} "
                            "or the working directory)")
        p.add_argument("--regime-override", default=None,
                       choices=[r.value for r in Regime],
                       help="force the rate regime, overriding the config "
                            "(expert flag: assumption checks still apply)")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamp from SVG output "
                            "(CSV/JSON never carry one)")
        p.add_argument("--format", default="all",
                       choices=["csv", "json", "svg", "all"],
                       help="which output kinds to write (default all)")
        if sigma:
            p.add_argument("--sigma", type=_positive_float, required=True,
                           help="diffusion value")
        if sigmas:
            p.add_argument("--sigmas", required=True, metavar="S1,S2,...",
                           help="comma-separated diffusion values; solved "
                                "in descending order")
        if epsilon:
            p.add_argument("--epsilon", type=_positive_float, default=None,
                           help="concentration cutoff length "
                                f"(default {analysis.DEFAULT_EPSILON})")

    p = sub.add_parser("solve", help="solve at one sigma and write the "
                                     "solution with diagnostics")
    common(p, sigma=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve along a sigma list and tabulate "
                                     "convergence to the limit profile")
    common(p, sigmas=True, epsilon=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limit", help="construct the applicable limit profile "
                                     "(or constraint corridors)")
    common(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("report", help="full motor-effect report with a "
                                      "dashboard plot")
    common(p, sigma=True, epsilon=True)
    p.set_defaults(func=cmd_report)
    return parser


def _load(args):
    try:
        config = load_config(args.config)
    except (FileNotFoundError, IsADirectoryError) as exc:
        # a bad --config path is the user's input, not an output I/O failure
        raise InputError(f"cannot read config {args.config!r}: {exc}") from exc
    if args.regime_override is not None:
        rates = dataclasses.replace(config.rates,
                                    regime=Regime(args.regime_override))
        config = dataclasses.replace(config, rates=rates)
    return config


def _grid_for(args, sigma_min):
    if args.grid is not None:
        return Grid(args.grid)
    return Grid(sweep_grid_cells(sigma_min))


def _out_dir(args):
    out = args.out or os.environ.get(OUT_DIR_ENV) or os.getcwd()
    os.makedirs(out, exist_ok=True)
    probe = os.path.join(out, ".write_probe")
    try:
        with open(probe, "w") as fh:
            fh.write("")
    finally:
        if os.path.exists(probe):
            os.remove(probe)
    return out


def _wants(args, kind):
    return args.format in (kind, "all")


def _timestamp(args):
    if args.no_timestamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y-%m-%d %H:%M:%SZ")


def _write(out_dir, name, text):
    path = os.path.join(out_dir, name)
    serialize.write_text(path, text)
    return path


def _scalar_meta(meta):
    return {k: v for k, v in (meta or {}).items()
            if isinstance(v, (bool, int, float, str)) or v is None}


# --- limit construction selection -------------------------------------------


def select_limit(config, grid, regions=None, assumptions=None):
    """Pick the limit construction the assumption report certifies.

    Returns (kind, payload): ("strong", (profile, certificate)),
    ("vanishing", bounds), ("piecewise", profile), ("bounded", profile),
    or (None, assumptions) when nothing applies.
    """
    regions = regions if regions is not None \
        else decompose_regions(config.potentials)
    assumptions = assumptions if assumptions is not None \
        else check_assumptions(config, regions)
    if assumptions.applicable.get("strong", False):
        return "strong", limit_strong(config, regions, grid)
    if assumptions.applicable.get("vanishing", False):
        return "vanishing", limit_vanishing_bounds(config, grid)
    if assumptions.applicable.get("piecewise", False):
        return "piecewise", limit_piecewise(config.potentials, regions, grid)
    if assumptions.applicable.get("bounded", False):
        return "bounded", limit_bounded(config.potentials, grid, assumptions)
    return None, assumptions


def _limit_profile_or_none(kind, payload):
    if kind == "strong":
        return payload[0]
    if kind in ("piecewise", "bounded"):
        return payload
    return None


# --- commands ----------------------------------------------------------------


def cmd_solve(args):
    config = _load(args)
    sigma = args.sigma
    grid = _grid_for(args, sigma)
    out_dir = _out_dir(args)
    tag = serialize.run_tag(config, [sigma])

    sweep = continuation_sweep(config, grid, ladder_sigmas(sigma))
    if not sweep.ok or sweep.entries[-1].sigma != sigma:
        failure = sweep.failure or {}
        raise SolverError(f"solve failed at sigma={failure.get('sigma', sigma):g}: "
                          f"{failure.get('error', 'unknown failure')}")
    entry = sweep.entries[-1]
    phase = entry.phase
    flux = check_flux_bounds(phase, config)
    gaps = pairwise_gap(phase)

    written = []
    if _wants(args, "csv"):
        if entry.density is not None:
            text = serialize.density_csv(entry.density)
        else:
            text = serialize.phase_csv(phase)
        written.append(_write(out_dir, f"solve_{tag}.csv", text))
    if _wants(args, "json"):
        doc = {
            "title": config.title,
            "sigma": sigma,
            "grid_cells": grid.cells,
            "solution_path": "density" if entry.density is not None
                             else "phase",
            "solver_meta": _scalar_meta(phase.meta),
            "flux_bounds": flux.describe(),
            "phase_gap": gaps.describe(),
        }
        written.append(_write(out_dir, f"solve_{tag}.json",
                              serialize.json_text(doc)))
    if _wants(args, "svg"):
        note = f"sigma={sigma:g}, N={grid.cells}"
        if entry.density is not None:
            series = list(entry.density.values)
            labels = [f"n_{i + 1}" for i in range(len(series))]
            svg = svgplot.line_plot(grid.nodes, series, labels,
                                    title=config.title or "solution",
                                    xlabel="x", ylabel="density",
                                    note=note, timestamp=_timestamp(args))
        else:
            series = list(phase.r_values)
            labels = [f"r_{i + 1}" for i in range(len(series))]
            svg = svgplot.line_plot(grid.nodes, series, labels,
                                    title=config.title or "solution",
                                    xlabel="x", ylabel="phase",
                                    note=note + " (phase path)",
                                    timestamp=_timestamp(args))
        written.append(_write(out_dir, f"solve_{tag}.svg", svg))
    print("\n".join(written))
    return EXIT_OK


def cmd_sweep(args):
    config = _load(args)
    sigmas = _parse_sigmas(args.sigmas)
    grid = _grid_for(args, min(sigmas))
    out_dir = _out_dir(args)
    tag = serialize.run_tag(config, sigmas)
    epsilon = args.epsilon or analysis.DEFAULT_EPSILON

    kind, payload = select_limit(config, grid)
    profile = _limit_profile_or_none(kind, payload)
    if profile is None:
        raise InputError(
            "no constructed limit profile applies to this configuration "
            f"(selection: {kind or 'none'}); assumption report: "
            + json.dumps(payload.applicable if kind is None else
                         {"kind": kind}, sort_keys=True))
    table = analysis.convergence_study(config, grid, sigmas, profile,
                                       epsilon=epsilon)

    written = []
    if _wants(args, "csv"):
        written.append(_write(out_dir, f"sweep_{tag}.csv",
                              serialize.convergence_csv(table)))
    if _wants(args, "json"):
        doc = {
            "title": config.title,
            "construction": kind,
            "grid_cells": grid.cells,
            "epsilon": epsilon,
            "table": table.describe(),
            "truncated": not table.ok,
        }
        written.append(_write(out_dir, f"sweep_{tag}.json",
                              serialize.json_text(doc)))
    if _wants(args, "svg"):
        rows = table.rows
        if rows:
            sig = np.array([r.sigma for r in rows])
            worst = table.worst_errors()
            far = np.array([r.far_mass for r in rows])
            svg = svgplot.line_plot(
                sig, [worst, far], ["max |R - limit|", "far mass"],
                title=f"{config.title or 'sweep'}: convergence",
                xlabel="sigma", ylabel="error", log_x=True, log_y=True,
                note=f"N={grid.cells}, construction={kind}",
                timestamp=_timestamp(args))
            written.append(_write(out_dir, f"sweep_{tag}.svg", svg))
    print("\n".join(written))
    if not table.ok:
        # partial results are already on disk; flag the truncation
        print(json.dumps({"truncated_at": table.failure.get("sigma"),
                          "error": table.failure.get("error")},
                         sort_keys=True), file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_limit(args):
    config = _load(args)
    # construction cost is one pass over the nodes, so default fine
    grid = Grid(args.grid) if args.grid is not None else Grid(2048)
    out_dir = _out_dir(args)
    chash = serialize.config_hash(config)

    regions = decompose_regions(config.potentials)
    assumptions = check_assumptions(config, regions)
    kind, payload = select_limit(config, grid, regions, assumptions)
    if kind is None:
        raise InputError(
            "no limit construction applies; assumption flags: "
            + json.dumps(assumptions.flags, sort_keys=True))

    written = []
    if kind == "vanishing":
        bounds = payload
        if _wants(args, "csv"):
            written.append(_write(out_dir, f"limit_{chash}.csv",
                                  serialize.constraint_csv(bounds, grid)))
        if _wants(args, "json"):
            doc = {"title": config.title, "construction": kind,
                   "grid_cells": grid.cells, "bounds": bounds.describe(),
                   "assumptions": assumptions.flags}
            written.append(_write(out_dir, f"limit_{chash}.json",
                                  serialize.json_text(doc)))
        if _wants(args, "svg"):
            series, labels = [], []
            for c in bounds.constraints:
                finite_upper = np.where(np.isfinite(c.upper), c.upper, np.nan)
                series.append(finite_upper)
                labels.append(f"upper bound, species {c.species + 1}")
            svg = svgplot.line_plot(
                grid.nodes, series, labels,
                title=f"{config.title or 'limit'}: slope corridors",
                xlabel="x", ylabel="slope bound",
                note=f"N={grid.cells} (lower bound 0 off descents)",
                timestamp=_timestamp(args))
            written.append(_write(out_dir, f"limit_{chash}.svg", svg))
        print("\n".join(written))
        return EXIT_OK

    profile = _limit_profile_or_none(kind, payload)
    residual = hj_residual(profile, config.potentials)
    if _wants(args, "csv"):
        written.append(_write(out_dir, f"limit_{chash}.csv",
                              serialize.profile_csv(profile)))
    if _wants(args, "json"):
        doc = {"title": config.title, "construction": kind,
               "grid_cells": grid.cells,
               "profile": profile.describe(),
               "hj_residual": residual.describe(),
               "assumptions": assumptions.flags}
        if kind == "strong":
            doc["bound_certificate"] = payload[1].describe()
        written.append(_write(out_dir, f"limit_{chash}.json",
                              serialize.json_text(doc)))
    if _wants(args, "svg"):
        svg = svgplot.line_plot(
            grid.nodes, [profile.r_values, profile.slope_values],
            ["r", "dr/dx"],
            title=f"{config.title or 'limit'}: profile ({kind})",
            xlabel="x", ylabel="value", note=f"N={grid.cells}",
            timestamp=_timestamp(args))
        written.append(_write(out_dir, f"limit_{chash}.svg", svg))
    print("\n".join(written))
    return EXIT_OK


def cmd_report(args):
    config = _load(args)
    sigma = args.sigma
    grid = _grid_for(args, sigma)
    out_dir = _out_dir(args)
    tag = serialize.run_tag(config, [sigma])
    epsilon = args.epsilon or analysis.DEFAULT_EPSILON

    doc = analysis.motor_effect_report(config, grid, sigma, epsilon=epsilon)
    written = []
    if _wants(args, "json"):
        written.append(_write(out_dir, f"report_{tag}.json",
                              serialize.json_text(doc)))
    if _wants(args, "svg"):
        written.append(_write(out_dir, f"report_{tag}.svg",
                              _dashboard_svg(args, config, grid, sigma,
                                             epsilon)))
    print("\n".join(written))
    return EXIT_OK


def _dashboard_svg(args, config, grid, sigma, epsilon):
    sweep = continuation_sweep(config, grid, ladder_sigmas(sigma))
    if not sweep.ok or sweep.entries[-1].sigma != sigma:
        failure = sweep.failure or {}
        raise SolverError(f"solve failed at sigma={failure.get('sigma', sigma):g}: "
                          f"{failure.get('error', 'unknown failure')}")
    entry = sweep.entries[-1]
    phase = entry.phase
    I = phase.species_count
    note = f"sigma={sigma:g}, N={grid.cells}"

    kind, payload = select_limit(config, grid)
    profile = _limit_profile_or_none(kind, payload)
    shifted = phase.r_values - phase.r_values[:, :1]

    if entry.density is not None:
        conc = analysis.concentration_masses(entry.density, epsilon)
    else:
        conc = analysis.concentration_from_phase(phase, epsilon)

    def density_panel(origin, w, h):
        if entry.density is not None:
            series = list(entry.density.values)
            labels = [f"n_{i + 1}" for i in range(I)]
            ylabel = "density"
        else:
            series = list(phase.r_values)
            labels = [f"r_{i + 1} (no representable density)"
                      for i in range(I)]
            ylabel = "phase"
        return svgplot.chart_group(grid.nodes, series, labels,
                                   title="solution", xlabel="x",
                                   ylabel=ylabel, note=note, origin=origin,
                                   width=w, height=h)

    def phase_panel(origin, w, h):
        return svgplot.chart_group(
            grid.nodes, list(phase.r_values),
            [f"r_{i + 1}" for i in range(I)], title="phase functions",
            xlabel="x", ylabel="phase", note=note, origin=origin,
            width=w, height=h)

    def limit_panel(origin, w, h):
        if profile is not None:
            overlays = [(grid.nodes, profile.r_values,
                         f"limit ({kind})", "5,3")]
            return svgplot.chart_group(
                grid.nodes, list(shifted),
                [f"r_{i + 1} - r_{i + 1}(0)" for i in range(I)],
                title="limit overlay", xlabel="x", ylabel="phase",
                note=note, origin=origin, width=w, height=h,
                overlays=overlays)
        slopes = phase.slopes()
        overlays = []
        if kind == "vanishing":
            for c in payload.constraints:
                finite_upper = np.where(np.isfinite(c.upper), c.upper,
                                        np.nan)
                overlays.append((grid.nodes, finite_upper,
                                 f"cap, species {c.species + 1}", "5,3"))
        return svgplot.chart_group(
            grid.nodes, list(slopes), [f"dr_{i + 1}/dx" for i in range(I)],
            title="slopes against corridor caps", xlabel="x",
            ylabel="slope", note=note, origin=origin, width=w, height=h,
            overlays=overlays)

    def mass_panel(origin, w, h):
        labels = [f"rho_{i + 1}" for i in range(I)] + ["far mass"]
        values = list(conc.rho_estimates) + [conc.total_far_mass]
        return svgplot.bar_group(labels, values, title="concentration",
                                 ylabel="mass fraction",
                                 note=f"epsilon={epsilon:g}", origin=origin,
                                 width=w, height=h)

    return svgplot.dashboard(
        [density_panel, phase_panel, limit_panel, mass_panel],
        timestamp=_timestamp(args))


# --- entry point --------------------------------------------------------------


def _error_doc(exit_code, kind, exc):
    return json.dumps({"exit_code": exit_code, "error_class": kind,
                       "message": str(exc)}, sort_keys=True)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(_error_doc(EXIT_INPUT, "input", exc), file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(_error_doc(EXIT_SOLVER, "solver", exc), file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(_error_doc(EXIT_IO, "io", exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
