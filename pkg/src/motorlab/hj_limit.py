"""Limit profiles of the phase functions as diffusion vanishes.

Constructs the zero-noise profiles the solved R_i converge to — min-plus
slopes on common ascents, the slope maximum on common descents, rest in
between — plus the two-species effective Hamiltonian of the strongly
switching regime (selected root fields with bound certificates) and the
nodewise inequality constraints available when switching itself vanishes.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_trapezoid

from motorlab.errors import InputError
from motorlab.model import (
    Regime,
    check_assumptions,
    decompose_regions,
    negative_slope_intervals,
)


class BranchLabel(str, Enum):
    MIN_PLUS = "min_plus"          # positive part of the slope minimum
    MAX_NEG = "max_neg"            # slope maximum on common descents
    ZERO = "zero"                  # rest branch between ascent and descent
    STRONG_ROOT = "strong_root"    # selected zero of the effective Hamiltonian
    VANISHING_BOUND = "vanishing"  # inequality-only regime, no constructed value


@dataclass(frozen=True)
class LimitProfile:
    """Limit phase profile R with R(0) = 0 and its nodewise slope/branch."""

    grid: object
    r_values: np.ndarray
    slope_values: np.ndarray
    branch_labels: np.ndarray     # per-node label strings (BranchLabel values)

    def __post_init__(self):
        expect = cumulative_trapezoid(self.slope_values, self.grid.nodes,
                                      initial=0.0)
        if self.r_values[0] != 0.0 or not np.array_equal(self.r_values, expect):
            raise InputError("limit profile must integrate its own slopes "
                             "from R(0) = 0")

    def describe(self):
        return {
            "r_values": self.r_values.tolist(),
            "slope_values": self.slope_values.tolist(),
            "branch_labels": self.branch_labels.tolist(),
        }


def _profile_from_slopes(grid, slopes, labels):
    r = cumulative_trapezoid(slopes, grid.nodes, initial=0.0)
    return LimitProfile(grid, r, slopes, labels)


def limit_bounded(pot, grid, assumptions=None):
    """Profile with slope = positive part of the species slope minimum.

    Valid when every point keeps at least one ascending species; the
    certificate produced by check_assumptions for this construction must
    be supplied and affirmative.
    """
    if assumptions is None:
        raise InputError("limit_bounded needs an assumption certificate "
                         "(run check_assumptions on the configuration)")
    assumptions.require("bounded")
    mins = pot.min_slope(grid.nodes)
    slopes = np.maximum(mins, 0.0)
    labels = np.where(mins > 0.0, BranchLabel.MIN_PLUS.value,
                      BranchLabel.ZERO.value)
    return _profile_from_slopes(grid, slopes, labels)


def _check_regions_resolvable(regions, grid):
    for kind, intervals in (("ascent", regions.j_intervals),
                            ("descent", regions.k_intervals)):
        for a, b in intervals:
            if not 0.0 <= a < b <= 1.0:
                raise InputError(f"{kind} interval ({a}, {b}) is not inside "
                                 "the domain")
            if not np.any((grid.nodes >= a) & (grid.nodes <= b)):
                raise InputError(
                    f"{kind} interval ({a:.6f}, {b:.6f}) contains no grid "
                    "node; the grid cannot represent this decomposition"
                )


def limit_piecewise(pot, regions, grid):
    """Three-branch profile: slope minimum on common ascents, slope maximum
    on common descents, zero in between.

    A node on a junction takes the branch of the interval to its right
    (one node's label; the integral is insensitive beyond O(h)).
    """
    _check_regions_resolvable(regions, grid)
    x = grid.nodes
    slopes = np.zeros(grid.node_count)
    labels = np.full(grid.node_count, BranchLabel.ZERO.value,
                     dtype="<U12")
    # paint right-to-left so an interval's left endpoint overrides the
    # interval that ends there (right-interval convention at junctions)
    for a, b in regions.k_intervals:
        mask = (x >= a) & (x <= b)
        slopes[mask] = pot.max_slope(x[mask])
        labels[mask] = BranchLabel.MAX_NEG.value
    for a, b in regions.j_intervals:
        mask = (x >= a) & (x <= b)
        slopes[mask] = pot.min_slope(x[mask])
        labels[mask] = BranchLabel.MIN_PLUS.value
    for a, b in regions.j_intervals:
        # a J right endpoint that also starts a K/neutral stretch belongs
        # to the right interval
        edge = (x == b) & (x != a)
        inside_k = any(ka <= b <= kb for ka, kb in regions.k_intervals)
        if np.any(edge) and not inside_k and b < 1.0:
            slopes[edge] = 0.0
            labels[edge] = BranchLabel.ZERO.value
    for a, b in regions.k_intervals:
        edge = (x == b) & (x != a)
        inside_j = any(ja <= b <= jb for ja, jb in regions.j_intervals)
        if np.any(edge) and not inside_j and b < 1.0:
            slopes[edge] = 0.0
            labels[edge] = BranchLabel.ZERO.value
    return _profile_from_slopes(grid, slopes, labels)


# --- effective Hamiltonian (two strongly switching species) -----------------


@dataclass(frozen=True)
class HamiltonianParams:
    """Frozen coefficients of the two-species effective Hamiltonian at one
    point: slope of each potential and the two switching profiles."""

    psi1_slope: float
    psi2_slope: float
    nu1: float
    nu2: float

    def __post_init__(self):
        if self.nu1 <= 0.0 or self.nu2 <= 0.0:
            raise InputError("effective Hamiltonian needs positive switching "
                             "rates")

    def betas(self, p):
        b1 = p * p - self.psi1_slope * p - self.nu1
        b2 = p * p - self.psi2_slope * p - self.nu2
        return b1, b2


def effective_hamiltonian(p, params):
    """H(p) = (b1 + b2 + sqrt((b1 - b2)^2 + 4 nu1 nu2)) / 2.

    The radicand is assembled in its manifestly nonnegative form, so the
    root is always defined and H(0) = 0 holds to rounding.
    """
    b1, b2 = params.betas(p)
    rad = (b1 - b2) ** 2 + 4.0 * params.nu1 * params.nu2
    return 0.5 * (b1 + b2 + np.sqrt(rad))


def _quartic_coeffs(params):
    a, b = params.psi1_slope, params.psi2_slope
    n1, n2 = params.nu1, params.nu2
    # (p^2 - a p - n1)(p^2 - b p - n2) - n1 n2, constant term cancels exactly
    return np.array([
        1.0,
        -(a + b),
        a * b - n1 - n2,
        a * n2 + b * n1,
        0.0,
    ])


def solve_ham_roots(params, realness=1e-9):
    """All real zeros of the effective Hamiltonian, sorted ascending.

    The zero set is the branch beta1 + beta2 <= 0 of the quartic
    beta1*beta2 = nu1*nu2.  p = 0 is a root for every parameter choice and
    is inserted exactly; the rest come from the deflated cubic via
    companion eigenvalues with two Newton polish steps on the quartic.
    """
    coeffs = _quartic_coeffs(params)
    cubic = coeffs[:4]                       # quartic = p * cubic(p)
    candidates = list(np.roots(cubic))
    quart = np.polynomial.polynomial.Polynomial(coeffs[::-1])
    dquart = quart.deriv()
    roots = [0.0]
    for z in candidates:
        for _ in range(2):
            dz = dquart(z)
            if dz != 0.0:
                z = z - quart(z) / dz
        if abs(z.imag) > realness * (1.0 + abs(z)):
            continue
        p = float(z.real)
        b1, b2 = params.betas(p)
        scale = 1.0 + p * p + params.nu1 + params.nu2
        if b1 + b2 > 1e-12 * scale:
            continue
        if any(abs(p - q) <= realness * (1.0 + abs(p)) for q in roots):
            continue
        roots.append(p)
    return sorted(roots)


@dataclass(frozen=True)
class BoundCertificate:
    """Nodewise lower bounds of the strongly switching regime.

    main_bounds: the asserted floor — the species slope minimum on common
    ascents, -sqrt(k) elsewhere.  aux_bounds: the sharper expression
    (psi1' - sqrt(psi1'^2 + 4 nu1))/2 recorded wherever psi1' > 0; kept as
    a diagnostic, not an assertion (see notes on the source of the two
    bounds).
    """

    nodes: np.ndarray
    j_mask: np.ndarray
    main_bounds: np.ndarray
    aux_bounds: np.ndarray       # NaN where psi1' <= 0
    sqrt_k: float

    def evaluate(self, slope_values, tolerance):
        """Check a slope field against the main bounds with a tolerance;
        returns (ok, worst_margin, violation_count)."""
        margins = np.asarray(slope_values) - self.main_bounds
        bad = margins < -tolerance
        return (not bool(bad.any()), float(margins.min()),
                int(np.count_nonzero(bad)))

    def describe(self):
        return {
            "sqrt_k": self.sqrt_k,
            "j_fraction": float(self.j_mask.mean()),
            "min_main_bound": float(self.main_bounds.min()),
        }


def limit_strong(config, regions, grid):
    """Selected root field of the effective Hamiltonian plus its bound
    certificate.

    Selection at each node: among the branch-feasible roots, keep those
    satisfying the theoretical floor (on common ascents the slope minimum,
    which forces the positive sign); of those, take the root closest to
    the previous node's choice, seeding with the smallest magnitude at the
    left boundary.  The rule is a documented heuristic — the theory fixes
    inequalities, not the selection.
    """
    if config.rates.regime is not Regime.STRONG:
        raise InputError("limit_strong applies to the strong-switching regime")
    if config.species_count != 2:
        raise InputError("the effective Hamiltonian is built for exactly "
                         "two species")
    x = grid.nodes
    slopes = config.potentials.slopes_at(x)
    min_slopes = slopes.min(axis=0)
    nu1_profile = config.rates.offdiag_at(1, 0, x)   # channel 1 -> 2
    nu2_profile = config.rates.offdiag_at(0, 1, x)   # channel 2 -> 1
    k = config.rates.lower_bound_k
    if k is None or k <= 0.0:
        raise InputError("strong regime requires a positive rate lower bound")
    sqrt_k = float(np.sqrt(k))

    j_mask = np.zeros(grid.node_count, dtype=bool)
    for a, b in regions.j_intervals:
        j_mask |= (x >= a) & (x <= b)
    floors = np.where(j_mask, min_slopes, -sqrt_k)

    selected = np.empty(grid.node_count)
    labels = np.full(grid.node_count, BranchLabel.STRONG_ROOT.value,
                     dtype="<U12")
    prev = None
    for m in range(grid.node_count):
        params = HamiltonianParams(float(slopes[0, m]), float(slopes[1, m]),
                                   float(nu1_profile[m]), float(nu2_profile[m]))
        roots = solve_ham_roots(params)
        feasible = [p for p in roots if p >= floors[m] - 1e-9] or roots
        if prev is None:
            choice = min(feasible, key=abs)
        else:
            choice = min(feasible, key=lambda p: abs(p - prev))
        selected[m] = choice
        prev = choice

    psi1 = slopes[0]
    aux = np.where(psi1 > 0.0,
                   0.5 * (psi1 - np.sqrt(psi1 * psi1 + 4.0 * nu1_profile)),
                   np.nan)
    cert = BoundCertificate(nodes=x, j_mask=j_mask, main_bounds=floors,
                            aux_bounds=aux, sqrt_k=sqrt_k)
    profile = _profile_from_slopes(grid, selected, labels)
    return profile, cert


# --- vanishing-switching constraints -----------------------------------------


@dataclass(frozen=True)
class SignConstraint:
    """Nodewise inequality corridor for one species' limit slope.

    On the species' own descent intervals the slope is capped by the
    potential slope (upper bound, lower unbounded); elsewhere it is
    nonnegative (lower bound 0, upper unbounded).
    """

    species: int
    lower: np.ndarray
    upper: np.ndarray
    descent_mask: np.ndarray

    def evaluate(self, slope_values, tolerance):
        s = np.asarray(slope_values)
        low_bad = s < self.lower - tolerance
        high_bad = s > self.upper + tolerance
        worst = min(float((s - self.lower).min()),
                    float((self.upper - s).min()))
        return (not bool(low_bad.any() or high_bad.any()), worst,
                int(np.count_nonzero(low_bad | high_bad)))


@dataclass(frozen=True)
class VanishingBounds:
    constraints: tuple            # one SignConstraint per species
    j_equality_target: np.ndarray  # min slope on common ascents, NaN off them

    def describe(self):
        return {
            "species": [c.species for c in self.constraints],
            "descent_fractions": [float(c.descent_mask.mean())
                                  for c in self.constraints],
        }


def limit_vanishing_bounds(config, grid):
    """Inequality constraints for computed slopes when switching vanishes.

    There is no constructed profile in this regime — the theory pins signs
    and caps, not values, except on common ascents where the slope minimum
    is the equality target.  Requires the descent-handoff assumption: each
    species' descent must end inside the support of an outgoing switching
    channel toward a non-descending species.
    """
    if config.rates.regime is not Regime.VANISHING:
        raise InputError("vanishing-regime bounds need a vanishing-regime "
                         "configuration")
    regions = decompose_regions(config.potentials)
    report = check_assumptions(config, regions)
    if not report.flags["descent_handoff"]:
        failing = [d for d in report.details["descent_handoff"]
                   if d["partner"] is None]
        iv = failing[0]["interval"]
        raise InputError(
            "descent-handoff assumption fails for species "
            f"{failing[0]['species'] + 1} on ({iv[0]:.4f}, {iv[1]:.4f}): "
            "no active outgoing channel toward a non-descending species "
            "near the right endpoint"
        )

    x = grid.nodes
    constraints = []
    for i in range(config.species_count):
        lower = np.zeros(grid.node_count)
        upper = np.full(grid.node_count, np.inf)
        mask = np.zeros(grid.node_count, dtype=bool)
        for a, b in negative_slope_intervals(config.potentials, i):
            m = (x >= a) & (x <= b)
            mask |= m
        slope_i = config.potentials.species[i].slope(x)
        lower[mask] = -np.inf
        upper[mask] = slope_i[mask]
        constraints.append(SignConstraint(species=i, lower=lower, upper=upper,
                                          descent_mask=mask))

    target = np.full(grid.node_count, np.nan)
    for a, b in regions.j_intervals:
        m = (x >= a) & (x <= b)
        target[m] = config.potentials.min_slope(x[m])
    return VanishingBounds(tuple(constraints), target)


# --- viscosity residual -------------------------------------------------------


@dataclass(frozen=True)
class HJResidualReport:
    values: np.ndarray
    junction_nodes: tuple
    max_interior: float
    max_junction: float

    def describe(self):
        return {"max_interior": self.max_interior,
                "max_junction": self.max_junction,
                "junctions": list(self.junction_nodes)}


def hj_residual(profile, pot):
    """|R'|^2 + max_i(-psi_i' R') evaluated on the stored slopes.

    Inside a branch the expression cancels exactly by construction; only
    nodes flanking a branch change carry discretization-sized values.
    """
    x = profile.grid.nodes
    rp = profile.slope_values
    slopes = pot.slopes_at(x)
    residual = rp * rp + np.max(-slopes * rp, axis=0)

    changes = np.nonzero(profile.branch_labels[1:]
                         != profile.branch_labels[:-1])[0]
    junction = set()
    for c in changes:
        junction.update((int(c), int(c + 1)))
    junction_nodes = tuple(sorted(junction))
    interior_mask = np.ones(x.size, dtype=bool)
    for j in junction_nodes:
        interior_mask[j] = False
    max_interior = float(np.abs(residual[interior_mask]).max()) \
        if interior_mask.any() else 0.0
    max_junction = float(np.abs(residual[~interior_mask]).max()) \
        if junction_nodes else 0.0
    return HJResidualReport(values=residual, junction_nodes=junction_nodes,
                            max_interior=max_interior,
                            max_junction=max_junction)
