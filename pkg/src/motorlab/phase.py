"""Phase variables R_i = -sigma log n_i and their diagnostics.

The phase representation is the numerically robust face of the problem:
densities at small sigma span hundreds of orders of magnitude, while the
R_i stay O(1) with O(1) slopes.  This module holds the field type, the
density -> phase conversion, and the checks the theory makes falsifiable
(interface slope bounds, pairwise gaps, the nonlinear residual).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from motorlab.errors import InputError, SolverError
from motorlab.kernels import bernoulli, phase_residual as _kernel_residual

DENSITY_FLOOR = 1e-300  # below this, densities are rejected, never clamped


def discrete_slope(values, h):
    """Centered differences inside, one-sided second order at the ends."""
    return np.gradient(values, h, axis=-1, edge_order=2)


def _s_from_r(r_values, sigma):
    # S = -sigma log sum_i exp(-R_i/sigma), evaluated without underflow
    return -sigma * logsumexp(-np.asarray(r_values) / sigma, axis=0)


@dataclass(frozen=True)
class PhaseField:
    """R_i on the grid nodes, plus the aggregate S = -sigma log sum exp."""

    grid: object
    sigma: float
    r_values: np.ndarray
    s_values: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=np.float64)
        if r.ndim != 2 or r.shape[1] != self.grid.node_count:
            raise InputError("r_values must have shape (species, nodes)")
        object.__setattr__(self, "r_values", r)
        if self.s_values is None:
            object.__setattr__(self, "s_values", _s_from_r(r, self.sigma))
        if not np.all(np.isfinite(r)):
            raise SolverError("phase field contains non-finite entries")
        # aggregate sandwich: S <= min_i R_i <= S + sigma log I
        rmin = self.r_values.min(axis=0)
        slack = 1e-12 * (1.0 + np.abs(rmin).max())
        gap = rmin - self.s_values
        if gap.min() < -slack:
            raise SolverError("aggregate phase exceeds the species minimum")
        if gap.max() > self.sigma * np.log(self.species_count) + slack:
            raise SolverError("species minimum strays above the log-I envelope")

    @property
    def species_count(self):
        return self.r_values.shape[0]

    def densities(self):
        """exp(-R_i/sigma); raises when any value would underflow."""
        z = -self.r_values / self.sigma
        if z.min() < np.log(DENSITY_FLOOR):
            raise SolverError(
                "densities underflow the representable floor; "
                "stay in phase variables at this sigma"
            )
        return np.exp(z)

    def slopes(self):
        return discrete_slope(self.r_values, self.grid.h)

    def shifted(self, constant):
        """Add a common constant to every species (gauge move, exact)."""
        r = self.r_values + constant
        return PhaseField(self.grid, self.sigma, r, self.s_values + constant,
                          dict(self.meta))


def to_phase(density):
    """Convert a solved DensityField to phase variables."""
    n = np.asarray(density.values)
    if n.min() < DENSITY_FLOOR:
        i, m = np.unravel_index(int(np.argmin(n)), n.shape)
        raise SolverError(
            f"density of species {i + 1} at node {m} is below the representable "
            "floor; the phase path is authoritative here"
        )
    sigma = density.sigma
    r = -sigma * np.log(n)
    s = -sigma * np.log(n.sum(axis=0))
    meta = dict(getattr(density, "meta", {}) or {})
    meta["path"] = "density"
    return PhaseField(density.grid, sigma, r, s, meta)


def phase_consistency(phase, density):
    """Max relative mismatch between exp(-R/sigma) and the source density."""
    n = np.asarray(density.values)
    rebuilt = np.exp(-phase.r_values / phase.sigma)
    mask = n > DENSITY_FLOOR
    return float(np.max(np.abs(rebuilt[mask] - n[mask]) / n[mask]))


# --- interface slope bounds -------------------------------------------------


@dataclass(frozen=True)
class FluxBoundReport:
    """Interface-midpoint check of min_i psi_i' <= DS <= max_i psi_i'."""

    ok: bool
    tolerance: float
    worst_low: float    # max of min_slope - DS (<= tol when ok)
    worst_high: float   # max of DS - max_slope (<= tol when ok)
    violations: int

    def describe(self):
        return {"ok": self.ok, "tolerance": self.tolerance,
                "worst_low": self.worst_low, "worst_high": self.worst_high,
                "violations": self.violations}


def check_flux_bounds(phase, config, slack_factor=5.0):
    """Check the aggregate slope against the species slope envelope.

    DS is the exact per-interface difference quotient of S; the envelope is
    evaluated at interface midpoints, and the tolerance slack_factor*h*Lip
    accounts for the half-cell offset between the two.
    """
    h = phase.grid.h
    ds = np.diff(phase.s_values) / h
    mids = 0.5 * (phase.grid.nodes[:-1] + phase.grid.nodes[1:])
    slopes = config.potentials.slopes_at(mids)
    lo = slopes.min(axis=0)
    hi = slopes.max(axis=0)
    # the 1e-9 floor absorbs log/exp rounding in S; it only matters when
    # the slopes have no curvature at all and the envelope is an equality
    tol = (slack_factor * h * config.potentials.slope_lipschitz()
           + 1e-9 * max(1.0, float(np.abs(slopes).max())))
    low_excess = lo - ds          # positive where DS dips under the minimum
    high_excess = ds - hi         # positive where DS exceeds the maximum
    violations = int(np.count_nonzero((low_excess > tol) | (high_excess > tol)))
    return FluxBoundReport(
        ok=violations == 0,
        tolerance=float(tol),
        worst_low=float(low_excess.max()),
        worst_high=float(high_excess.max()),
        violations=violations,
    )


# --- pairwise gaps ----------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    """For every species pair: trapezoidal integral of the squared gap and
    the max absolute gap."""

    pairs: tuple                 # ((i, j), ...) with i < j
    square_integrals: np.ndarray
    max_abs: np.ndarray
    sigma: float

    def describe(self):
        return {
            "pairs": [list(p) for p in self.pairs],
            "square_integrals": self.square_integrals.tolist(),
            "max_abs": self.max_abs.tolist(),
            "sigma": self.sigma,
        }


def pairwise_gap(phase):
    I = phase.species_count
    x = phase.grid.nodes
    pairs, integrals, maxima = [], [], []
    for i in range(I):
        for j in range(i + 1, I):
            d = phase.r_values[i] - phase.r_values[j]
            pairs.append((i, j))
            integrals.append(float(np.trapezoid(d * d, x)))
            maxima.append(float(np.abs(d).max()))
    return GapReport(tuple(pairs), np.asarray(integrals), np.asarray(maxima),
                     phase.sigma)


# --- nonlinear residual ------------------------------------------------------


def phase_system_pieces(config, grid, sigma):
    """Interface weights and effective rates entering the phase system."""
    nodes = grid.nodes
    psi = config.potentials.values_at(nodes)
    t = np.diff(psi, axis=1) / sigma
    bp = bernoulli(t)
    bm = bernoulli(-t)
    nu = config.rates.effective_matrix_at(nodes, sigma)
    return bp, bm, nu


def phase_residual(phase, config):
    """Residual of the discrete phase system at every node.

    The residual is the exponentially fitted cell balance rewritten in the
    R variables and scaled by sigma over the cell volume, so a converged
    Newton solution and a converted density solution both drive it to the
    solver tolerance.  Exponentials are clamped (with a linear penalty)
    above the overflow cap, so the evaluation never produces infinities.
    """
    bp, bm, nu = phase_system_pieces(config, phase.grid, phase.sigma)
    res, _ = _kernel_residual(phase.r_values, bp, bm, nu, phase.sigma,
                              phase.grid.h)
    return res


def residual_scale(grid, sigma):
    """Natural magnitude of one phase-residual unit (the flux coefficient)."""
    return (sigma / grid.h) ** 2
