"""Post-solve diagnostics: concentration near the origin, convergence of
phases to their limit profiles, and the checkable inequalities behind the
concentration statements.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from motorlab.errors import InputError, SolverError
from motorlab.hj_limit import limit_bounded, limit_piecewise, limit_strong, \
    limit_vanishing_bounds
from motorlab.model import Normalization, check_assumptions, decompose_regions
from motorlab.phase import check_flux_bounds, pairwise_gap
from motorlab.steady_solver import continuation_sweep, ladder_sigmas

DEFAULT_EPSILON = 0.05          # inside the first common ascent of every preset
MOTOR_EFFECT_FAR_MASS = 0.01    # total mass allowed beyond epsilon
RATE_FIT_FLOOR = 1e-9           # below this the scheme is exact, not converging
QUAD_TOL = 1e-10


# --- concentration -----------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationReport:
    """Trapezoidal mass split at the cutoff, per species and total.

    Under unit total mass the near-zero masses estimate the limiting point
    weights; their sum plus the far mass reproduces 1 exactly because the
    split integrates the same piecewise-linear interpolant.
    """

    epsilon: float
    masses_near_zero: tuple
    rho_estimates: tuple
    total_far_mass: float
    motor_effect: bool

    def describe(self):
        return {
            "epsilon": self.epsilon,
            "masses_near_zero": list(self.masses_near_zero),
            "rho_estimates": list(self.rho_estimates),
            "total_far_mass": self.total_far_mass,
            "motor_effect": self.motor_effect,
        }


def _split_mass(row, nodes, eps):
    """Trapezoidal integrals of one species over [0, eps] and [eps, 1].

    eps need not be a node; the interpolated split point keeps
    near + far equal to the full trapezoidal mass bit for bit.
    """
    v_eps = float(np.interp(eps, nodes, row))
    left = nodes < eps
    xs_near = np.concatenate([nodes[left], [eps]])
    ys_near = np.concatenate([row[left], [v_eps]])
    xs_far = np.concatenate([[eps], nodes[~left]])
    ys_far = np.concatenate([[v_eps], row[~left]])
    return float(np.trapezoid(ys_near, xs_near)), float(np.trapezoid(ys_far, xs_far))


def _concentration_from_rows(rows, nodes, eps):
    near, far = [], []
    for row in rows:
        a, b = _split_mass(row, nodes, eps)
        near.append(a)
        far.append(b)
    total_far = float(sum(far))
    return ConcentrationReport(
        epsilon=eps,
        masses_near_zero=tuple(near),
        rho_estimates=tuple(near),
        total_far_mass=total_far,
        motor_effect=total_far <= MOTOR_EFFECT_FAR_MASS,
    )


def concentration_masses(density, epsilon=DEFAULT_EPSILON):
    """Mass split of a solved density at the cutoff (unit-mass units)."""
    if not 0.0 < epsilon < 1.0:
        raise InputError("epsilon must lie strictly inside the domain")
    if density.normalization is not Normalization.UNIT_MASS:
        density = density.renormalized(Normalization.UNIT_MASS)
    return _concentration_from_rows(density.values, density.grid.nodes, epsilon)


def concentration_from_phase(phase, epsilon=DEFAULT_EPSILON):
    """Mass split recovered from phase variables.

    exp(-(R - min R)/sigma) never overflows, and nodes whose weight
    underflows carry no trapezoidal mass anyway, so this path stays valid
    long after the raw density stops being representable.
    """
    if not 0.0 < epsilon < 1.0:
        raise InputError("epsilon must lie strictly inside the domain")
    r = phase.r_values
    w = np.exp(-(r - r.min()) / phase.sigma)
    z = float(np.trapezoid(w.sum(axis=0), phase.grid.nodes))
    if z <= 0.0 or not np.isfinite(z):
        raise SolverError("phase weights carry no representable mass")
    return _concentration_from_rows(w / z, phase.grid.nodes, epsilon)


# --- convergence to the limit -------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    sigma: float
    errors: tuple          # per-species max-norm error after the R(0) shift
    gap_integrals: tuple   # pairwise integral of the squared phase gap
    far_mass: float

    def describe(self):
        return {"sigma": self.sigma, "errors": list(self.errors),
                "gap_integrals": list(self.gap_integrals),
                "far_mass": self.far_mass}


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    fitted_rate: float      # None when the fit is not meaningful
    rate_note: str
    failure: dict           # sweep truncation marker, None when complete

    @property
    def ok(self):
        return self.failure is None

    def worst_errors(self):
        return np.array([max(row.errors) for row in self.rows])

    def describe(self):
        return {
            "rows": [row.describe() for row in self.rows],
            "fitted_rate": self.fitted_rate,
            "rate_note": self.rate_note,
            "failure": self.failure,
        }


def _limit_on_grid(limit, grid):
    if limit.grid.node_count == grid.node_count and \
            np.array_equal(limit.grid.nodes, grid.nodes):
        return limit.r_values
    return np.interp(grid.nodes, limit.grid.nodes, limit.r_values)


def convergence_study(config, grid, sigmas, limit, epsilon=DEFAULT_EPSILON,
                      newton_tol=1e-9):
    """Solve along descending sigma and tabulate distance to the limit.

    Errors are measured after subtracting each species' own value at the
    origin, which removes the normalization offset and matches the limit's
    R(0) = 0 convention.  Solver failures truncate the table and are
    recorded, not raised.
    """
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise InputError("convergence study needs at least one diffusion value")
    target = _limit_on_grid(limit, grid)
    sweep = continuation_sweep(config, grid, sigmas, newton_tol=newton_tol)

    rows = []
    for entry in sweep.entries:
        phase = entry.phase
        shifted = phase.r_values - phase.r_values[:, :1]
        errors = tuple(float(np.abs(shifted[i] - target).max())
                       for i in range(shifted.shape[0]))
        gaps = tuple(pairwise_gap(phase).square_integrals.tolist())
        if entry.density is not None:
            conc = concentration_masses(entry.density, epsilon)
        else:
            conc = concentration_from_phase(phase, epsilon)
        rows.append(ConvergenceRow(sigma=entry.sigma, errors=errors,
                                   gap_integrals=gaps,
                                   far_mass=conc.total_far_mass))

    worst = np.array([max(r.errors) for r in rows]) if rows else np.array([])
    if worst.size < 2:
        rate, note = None, "need at least two resolved diffusion values"
    elif worst.min() <= RATE_FIT_FLOOR:
        rate, note = None, "errors sit at the scheme's exactness floor"
    else:
        slope = np.polyfit(np.log([r.sigma for r in rows]), np.log(worst), 1)[0]
        rate, note = float(slope), "least-squares log-log slope (descriptive)"
    return ConvergenceTable(rows=tuple(rows), fitted_rate=rate, rate_note=note,
                            failure=sweep.failure)


# --- inequality conditions ----------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    """Quadrature evaluation of the concentration inequalities.

    pair entries compare each common descent against the common ascent of
    the same index; the aggregate line compares sqrt(k) times the total
    descent length against the ascent integral of the slope minimum.
    """

    pairs: tuple             # dicts: k, descent_integral, ascent_integral, ok
    pair_counts: tuple       # (descent intervals, ascent intervals)
    pairing_mismatch: bool   # more descents than ascents to dominate them
    pairwise_ok: bool
    aggregate_lhs: float
    aggregate_rhs: float
    aggregate_ok: bool
    origin_starts_ascent: bool
    origin_min_slope: float

    def describe(self):
        return {
            "pairs": [dict(p) for p in self.pairs],
            "pair_counts": list(self.pair_counts),
            "pairing_mismatch": self.pairing_mismatch,
            "pairwise_ok": self.pairwise_ok,
            "aggregate_lhs": self.aggregate_lhs,
            "aggregate_rhs": self.aggregate_rhs,
            "aggregate_ok": self.aggregate_ok,
            "origin_starts_ascent": self.origin_starts_ascent,
            "origin_min_slope": self.origin_min_slope,
        }


def _quad(fn, a, b):
    val, _ = quad(fn, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return float(val)


def check_corollary_conditions(pot, regions, rates):
    """Evaluate the domination inequalities between descents and ascents."""
    min_fn = lambda t: float(pot.min_slope(np.array([t]))[0])
    max_fn = lambda t: float(pot.max_slope(np.array([t]))[0])
    j_iv = list(regions.j_intervals)
    k_iv = list(regions.k_intervals)

    pairs = []
    for k, ((ka, kb), (ja, jb)) in enumerate(zip(k_iv, j_iv)):
        descent = abs(_quad(max_fn, ka, kb))
        ascent = _quad(min_fn, ja, jb)
        pairs.append({"index": k, "descent_integral": descent,
                      "ascent_integral": ascent, "ok": descent < ascent})
    mismatch = len(k_iv) > len(j_iv)
    pairwise_ok = (not mismatch) and all(p["ok"] for p in pairs)

    k_rate = rates.lower_bound_k or 0.0
    total_descent = sum(b - a for a, b in k_iv)
    lhs = float(np.sqrt(k_rate) * total_descent)
    rhs = float(sum(_quad(min_fn, a, b) for a, b in j_iv))
    origin_starts = bool(j_iv) and j_iv[0][0] <= 1e-9
    return ConditionReport(
        pairs=tuple(pairs),
        pair_counts=(len(k_iv), len(j_iv)),
        pairing_mismatch=mismatch,
        pairwise_ok=pairwise_ok,
        aggregate_lhs=lhs,
        aggregate_rhs=rhs,
        aggregate_ok=lhs < rhs,
        origin_starts_ascent=origin_starts,
        origin_min_slope=float(pot.min_slope(np.array([0.0]))[0]),
    )


# --- composite report ----------------------------------------------------------


def _limit_comparison(config, grid, phase, regions, assumptions):
    """Distance of the solved phase to whichever limit construction the
    assumption report certifies; None when no construction applies."""
    h = grid.h
    slope_tol = 10.0 * h + 0.01
    shifted = phase.r_values - phase.r_values[:, :1]
    slopes = phase.slopes()

    if assumptions.applicable.get("strong", False):
        profile, cert = limit_strong(config, regions, grid)
        errors = np.abs(shifted - profile.r_values).max(axis=1)
        checks = [cert.evaluate(slopes[i], slope_tol) for i in
                  range(slopes.shape[0])]
        return {
            "construction": "strong_root",
            "max_errors": errors.tolist(),
            "bound_ok": all(c[0] for c in checks),
            "worst_bound_margin": min(c[1] for c in checks),
        }
    if assumptions.applicable.get("vanishing", False):
        bounds = limit_vanishing_bounds(config, grid)
        checks = [c.evaluate(slopes[c.species], slope_tol)
                  for c in bounds.constraints]
        return {
            "construction": "vanishing_bounds",
            "bound_ok": all(c[0] for c in checks),
            "worst_bound_margin": min(c[1] for c in checks),
            "violations": [c[2] for c in checks],
        }
    if assumptions.applicable.get("piecewise", False):
        profile = limit_piecewise(config.potentials, regions, grid)
        errors = np.abs(shifted - profile.r_values).max(axis=1)
        return {"construction": "piecewise", "max_errors": errors.tolist()}
    if assumptions.applicable.get("bounded", False):
        profile = limit_bounded(config.potentials, grid, assumptions)
        errors = np.abs(shifted - profile.r_values).max(axis=1)
        return {"construction": "bounded", "max_errors": errors.tolist()}
    return None


def motor_effect_report(config, grid, sigma_final, epsilon=DEFAULT_EPSILON):
    """Single JSON-ready document: solve, concentration, flux bounds, phase
    gaps, limit comparison, and the inequality conditions."""
    regions = decompose_regions(config.potentials)
    assumptions = check_assumptions(config, regions)
    # walk down from a tame sigma: a cold start at the target may be far
    # outside the Newton basin when sigma_final is stiff
    sweep = continuation_sweep(config, grid, ladder_sigmas(float(sigma_final)))
    if not sweep.ok or sweep.entries[-1].sigma != float(sigma_final):
        failure = sweep.failure or {}
        raise SolverError(
            f"solve failed at sigma={failure.get('sigma', sigma_final)}: "
            f"{failure.get('error', '?')}"
        )
    entry = sweep.entries[-1]
    phase = entry.phase
    if entry.density is not None:
        conc = concentration_masses(entry.density, epsilon)
        solution_path = "density"
    else:
        conc = concentration_from_phase(phase, epsilon)
        solution_path = "phase"

    flux = check_flux_bounds(phase, config)
    gaps = pairwise_gap(phase)
    conditions = check_corollary_conditions(config.potentials, regions,
                                            config.rates)
    comparison = _limit_comparison(config, grid, phase, regions, assumptions)
    return {
        "title": config.title,
        "sigma": float(sigma_final),
        "grid_cells": grid.cells,
        "normalization": config.normalization.value,
        "regime": config.rates.regime.value,
        "solution_path": solution_path,
        "motor_effect": conc.motor_effect,
        "concentration": conc.describe(),
        "flux_bounds": flux.describe(),
        "phase_gap": gaps.describe(),
        "conditions": conditions.describe(),
        "limit_comparison": comparison,
        "assumption_flags": dict(assumptions.flags),
        "solver_meta": {k: v for k, v in phase.meta.items()
                        if isinstance(v, (str, int, float, bool))},
    }
