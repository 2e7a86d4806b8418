"""Steady-state solvers.

Two routes to the same stationary system:

* density path — the steady state is the positive null vector of the
  assembled operator, pinned down by one normalization row (bordered
  direct solve, iterative refinement, inverse-power fallback);
* phase path — damped Newton on the cell balances rewritten in
  R_i = -sigma log n_i, which stays well-scaled long after the densities
  themselves have left the representable range.

A sigma-continuation driver walks a descending sigma list, switching from
the density path to the phase path at the representability boundary and
warm-starting each Newton solve from the previous sigma.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import norm as sparse_norm, splu
from scipy.special import logsumexp

from motorlab import kernels
from motorlab.discretize import adjoint_consistency, assemble_operator
from motorlab.errors import InputError, NonConvergenceError, SolverError
from motorlab.model import Normalization
from motorlab.phase import (
    DENSITY_FLOOR,
    PhaseField,
    phase_system_pieces,
    to_phase,
)

EXP_GATE = 690.0  # max R/sigma for which exp(-R/sigma) stays normal


def normalization_value(values, grid, normalization):
    """The scalar the chosen normalization pins to 1."""
    values = np.asarray(values)
    if normalization is Normalization.UNIT_AT_ORIGIN:
        return float(values[:, 0].sum())
    return float((values.sum(axis=0) * grid.volumes).sum())


@dataclass(frozen=True)
class DensityField:
    """Positive nodal densities n_i, validated on construction."""

    grid: object
    sigma: float
    values: np.ndarray
    normalization: Normalization
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[1] != self.grid.node_count:
            raise InputError("density values must have shape (species, nodes)")
        worst = np.unravel_index(int(np.argmin(v)), v.shape)
        if v[worst] <= 0.0:
            i, m = worst
            raise SolverError(
                f"nonpositive density for species {i + 1} at node {m} "
                f"(x = {self.grid.nodes[m]:.6f}, value {v[worst]:.3e})"
            )
        norm = normalization_value(v, self.grid, self.normalization)
        tol = 1e-12 if self.normalization is Normalization.UNIT_AT_ORIGIN else 1e-10
        if abs(norm - 1.0) > tol:
            raise SolverError(
                f"normalization off by {norm - 1.0:.3e} "
                f"(limit {tol:g} for {self.normalization.value})"
            )

    @property
    def species_count(self):
        return self.values.shape[0]

    def total(self):
        return self.values.sum(axis=0)

    def renormalized(self, normalization):
        scale = normalization_value(self.values, self.grid, normalization)
        return DensityField(self.grid, self.sigma, self.values / scale,
                            normalization, dict(self.meta))


def _flatten(values):
    # (I, M) species-major array -> node-major flat vector
    return np.asarray(values).T.ravel()


def _unflatten(flat, species_count):
    return flat.reshape(-1, species_count).T


def _constraint_row(op, normalization):
    I = op.species_count
    M = op.grid.node_count
    if normalization is Normalization.UNIT_AT_ORIGIN:
        cols = np.arange(I)
        vals = np.ones(I)
    else:
        cols = np.arange(I * M)
        vals = np.repeat(op.grid.volumes, I)
    return cols, vals


def solve_null_vector(op, normalization, max_refinements=5):
    """Positive steady state of the assembled operator.

    One balance row (species 1 at the left boundary) is replaced by the
    normalization constraint; that row is redundant because the transpose
    annihilates the all-ones vector.  The bordered system is solved
    directly, polished by iterative refinement against the bordered
    residual, and — if the refined solution still fails the null-space
    tolerance — recomputed by inverse power iteration on a regularized
    copy.
    """
    if adjoint_consistency(op) > 1e-10:
        raise InputError("operator fails the adjoint consistency gate; "
                         "column sums must vanish before solving")
    A = op.matrix
    n_dof = A.shape[0]
    I = op.species_count

    bordered = A.tolil(copy=True)
    cols, vals = _constraint_row(op, normalization)
    bordered.rows[0] = list(map(int, cols))
    bordered.data[0] = list(map(float, vals))
    B = bordered.tocsc()
    rhs = np.zeros(n_dof)
    rhs[0] = 1.0

    try:
        lu = splu(B)
    except RuntimeError as exc:
        raise SolverError(f"bordered system is singular: {exc}") from exc
    n = lu.solve(rhs)

    # polish toward the 1e-12 linear-solve contract; the acceptance gate
    # below is the looser 1e-10 null-space tolerance
    op_norm = sparse_norm(A, np.inf)
    refinements = 0
    for _ in range(max_refinements):
        if np.abs(A @ n).max() <= 1e-12 * op_norm * np.abs(n).max():
            break
        correction = lu.solve(rhs - B @ n)
        if not np.all(np.isfinite(correction)):
            break
        n = n + correction
        refinements += 1

    residual = np.abs(A @ n).max()
    if residual > 1e-10 * op_norm * np.abs(n).max() or n.min() <= 0.0:
        # the constraint row mixes signs, and at stiff sigma its direct
        # solve can lose positivity in the exponentially small entries;
        # inverse iteration on the regularized M-matrix is subtraction-free
        # in exactly those entries and restores an elementwise-positive
        # vector
        n = _inverse_power(A, n, op_norm)
        residual = np.abs(A @ n).max()
        if residual > 1e-10 * op_norm * np.abs(n).max():
            raise SolverError(
                f"null-vector residual {residual:.3e} exceeds tolerance "
                f"after refinement and inverse iteration"
            )

    values = _unflatten(n, I)
    scale = normalization_value(values, op.grid, normalization)
    if scale <= 0.0 or not np.isfinite(scale):
        raise SolverError("normalization functional is degenerate on the "
                          "computed null vector")
    values = values / scale
    if 0.0 < values.min() < DENSITY_FLOOR:
        raise SolverError(
            "steady state underflows the representable floor; "
            "solve in phase variables at this sigma"
        )
    meta = {"path": "null_vector", "residual": float(residual),
            "refinements": refinements}
    return DensityField(op.grid, op.sigma, values, normalization, meta)


def _inverse_power(A, seed, op_norm, iterations=40):
    # shift just off the zero eigenvalue; the factorization then amplifies
    # the null direction by ~1/delta per pass
    delta = max(op_norm, 1.0) * 1e-12
    reg = (A + delta * sp.identity(A.shape[0], format="csc")).tocsc()
    lu = splu(reg)
    if np.all(np.isfinite(seed)) and np.abs(seed).max() > 0:
        # a positive seed keeps every iterate positive: the regularized
        # operator is an M-matrix, so its inverse is elementwise nonnegative
        y = np.abs(seed)
    else:
        y = np.ones(A.shape[0])
    y = y / np.abs(y).max()
    for _ in range(iterations):
        y = lu.solve(y)
        y = y / np.abs(y).max()
    if y.sum() < 0:
        y = -y
    return y


def time_march(config, grid, sigma, dt, tol=1e-10, max_steps=200_000):
    """Implicit-Euler relaxation to the steady state from uniform data.

    The mass matrix is the diagonal of cell volumes, so total mass is
    conserved exactly at every step and the iteration converges to the
    same null vector the direct solver finds.
    """
    if dt <= 0.0:
        raise InputError("dt must be positive")
    op = assemble_operator(config, grid, sigma)
    A = op.matrix
    scale = np.abs(A.data).max()
    vols = np.repeat(grid.volumes, op.species_count)
    if dt * scale > 1e12 * vols.min():
        raise InputError(
            f"dt = {dt:g} fails the implicit-Euler solvability check "
            f"(dt * |op| / min volume = {dt * scale / vols.min():.3e} > 1e12)"
        )
    M = sp.diags(vols, format="csc")
    lu = splu((M + dt * A).tocsc())

    n = np.ones(A.shape[0])
    last_rate = np.inf
    for step in range(1, max_steps + 1):
        n_next = lu.solve(vols * n)
        last_rate = np.abs(n_next - n).max() / dt
        n = n_next
        if last_rate <= tol:
            values = _unflatten(n, op.species_count)
            scale0 = normalization_value(values, grid, config.normalization)
            meta = {"path": "time_march", "steps": step,
                    "increment_rate": float(last_rate)}
            return DensityField(grid, sigma, values / scale0,
                                config.normalization, meta)
    raise NonConvergenceError(
        f"time march did not settle within {max_steps} steps",
        residual=float(last_rate), iterations=max_steps,
    )


# --- phase Newton -----------------------------------------------------------


def _anchor_banded_row(ab, idx, bandwidth, n_dof):
    lo = max(0, idx - bandwidth)
    hi = min(n_dof - 1, idx + bandwidth)
    for col in range(lo, hi + 1):
        ab[bandwidth + idx - col, col] = 0.0
    ab[bandwidth, idx] = 1.0


def _normalization_shift(r, grid, sigma, normalization):
    """Common constant making the implied densities hit the normalization;
    exact because the phase system is invariant under such shifts."""
    if normalization is Normalization.UNIT_AT_ORIGIN:
        return sigma * logsumexp(-r[:, 0] / sigma)
    weights = np.broadcast_to(grid.volumes, r.shape)
    return sigma * logsumexp(-r / sigma, b=weights)


def solve_phase_newton(config, grid, sigma, init=None, tol=1e-9,
                       max_iterations=80):
    """Damped Newton on the phase form of the stationary system.

    The iteration works on the exponentially fitted cell balances
    transformed to R variables, whose solutions coincide with
    -sigma log(density path) up to one additive constant.  One residual
    row is replaced by an anchor pinning R at the warm start's minimum
    node, removing the constant-shift null direction; the converged field
    is then shifted (exactly) to the configured normalization.
    Exponentials are clamped at exp(700) with a linear continuation, and a
    solution whose final residual still engages the clamp is flagged
    untrusted in meta.
    """
    if sigma <= 0.0:
        raise InputError("sigma must be positive")
    I = config.species_count
    M = grid.node_count
    n_dof = I * M

    if init is None:
        r = config.potentials.values_at(grid.nodes).copy()
    elif isinstance(init, PhaseField):
        r = init.r_values.copy()
    else:
        r = np.array(init, dtype=np.float64, copy=True)
    if r.shape != (I, M) or not np.all(np.isfinite(r)):
        raise InputError("initial phase guess must be finite with shape "
                         f"({I}, {M})")

    bp, bm, nu = phase_system_pieces(config, grid, sigma)
    h = grid.h

    ai, am = np.unravel_index(int(np.argmin(r)), r.shape)
    anchor_idx = am * I + ai
    anchor_val = r[ai, am]

    def residual(rr):
        G, clamped = kernels.phase_residual(rr, bp, bm, nu, sigma, h)
        G[ai, am] = rr[ai, am] - anchor_val
        return G, clamped

    G, clamped = residual(r)
    res = np.abs(G).max()
    iterations = 0
    while res > tol:
        if iterations >= max_iterations:
            raise NonConvergenceError(
                f"phase Newton stalled at residual {res:.3e}; "
                "approach this sigma by continuation from a larger one",
                residual=float(res), iterations=iterations,
            )
        ab = kernels.phase_jacobian_bands(r, bp, bm, nu, sigma, h)
        _anchor_banded_row(ab, anchor_idx, I, n_dof)
        try:
            delta = solve_banded((I, I), ab, -G.T.ravel())
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"phase Jacobian is singular: {exc}") from exc
        delta = _unflatten(delta, I)

        step = 1.0
        accepted = False
        for _ in range(21):
            trial = r + step * delta
            G_trial, clamped_trial = residual(trial)
            res_trial = np.abs(G_trial).max()
            if np.isfinite(res_trial) and res_trial < res:
                r, G, res, clamped = trial, G_trial, res_trial, clamped_trial
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise NonConvergenceError(
                f"phase Newton could not descend below residual {res:.3e}; "
                "approach this sigma by continuation from a larger one",
                residual=float(res), iterations=iterations,
            )
        iterations += 1

    if iterations == 0 and isinstance(init, PhaseField):
        # already converged: hand the input back untouched (fixed point)
        return init

    shift = _normalization_shift(r, grid, sigma, config.normalization)
    r = r + shift
    meta = {
        "path": "newton",
        "iterations": iterations,
        "residual": float(res),
        "clamped": bool(clamped),
        "untrusted": bool(clamped),
        "backend": kernels.backend_name,
    }
    return PhaseField(grid, sigma, r, meta=meta)


def gradient_bound(phase, config):
    """Observed max |DR| against the a-priori slope bound.

    Bound: max |psi'| + sqrt(sigma * max |nu_ii - psi''|) with factor 1.1
    plus an O(h) allowance for the discrete derivative.
    """
    grid = phase.grid
    x = grid.nodes
    slopes = config.potentials.slopes_at(x)
    curv = config.potentials.curvatures_at(x)
    nu = config.rates.effective_matrix_at(x, phase.sigma)
    diag = np.einsum("iim->im", nu)
    observed = float(np.abs(phase.slopes()).max())
    raw = np.abs(slopes).max() + np.sqrt(
        phase.sigma * np.abs(diag - curv).max()
    )
    bound = 1.1 * raw + 5.0 * grid.h * config.potentials.slope_lipschitz()
    return observed, float(bound), observed <= bound


# --- sigma continuation -------------------------------------------------------


@dataclass(frozen=True)
class SweepEntry:
    sigma: float
    density: object      # DensityField or None when not representable
    phase: PhaseField


@dataclass(frozen=True)
class SweepResult:
    entries: tuple
    failure: dict = None

    @property
    def ok(self):
        return self.failure is None

    def sigmas(self):
        return [e.sigma for e in self.entries]


def _phase_range(r):
    return float(r.max() - r.min())


LADDER_START = 0.1


def ladder_sigmas(target, start=LADDER_START, ratio=2.0):
    """Descending geometric list from `start` ending exactly at `target`.

    A cold Newton start far into the stiff range has no usable basin;
    walking down from a tame sigma and warm-starting each step does.  The
    list feeds continuation_sweep when only the final sigma is wanted.
    """
    target = float(target)
    if target <= 0.0:
        raise InputError("ladder target sigma must be positive")
    if ratio <= 1.0:
        raise InputError("ladder ratio must exceed 1")
    out = []
    s = float(start)
    while s > target * (1.0 + 1e-9):
        out.append(s)
        s /= ratio
    out.append(target)
    return out


def continuation_sweep(config, grid, sigmas, newton_tol=1e-9):
    """Walk a descending sigma list, warm-starting each solve.

    Uses the density path while exp(-max R/sigma) stays representable
    (judging max R from the previous phase field, or the potential spread
    for the first entry), and the phase Newton path beyond.  A failure at
    any sigma stops the sweep; the completed prefix is returned together
    with a description of the failure.
    """
    sigmas = [float(s) for s in sigmas]
    if any(s <= 0.0 for s in sigmas):
        raise InputError("all sweep sigmas must be positive")
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise InputError("sweep sigmas must be strictly descending")

    entries = []
    prev_phase = None
    for s in sigmas:
        if prev_phase is None:
            psi = config.potentials.values_at(grid.nodes)
            spread = _phase_range(psi) + s * np.log(config.species_count)
        else:
            spread = _phase_range(prev_phase.r_values)
        try:
            if spread / s <= EXP_GATE:
                try:
                    op = assemble_operator(config, grid, s)
                    density = solve_null_vector(op, config.normalization)
                    # polish in phase variables: the linear solve is accurate
                    # relative to the dominant species only, and a species
                    # sitting many decades lower comes out as rounding noise;
                    # Newton on R treats every species at unit scale
                    ph = solve_phase_newton(config, grid, s,
                                            init=to_phase(density),
                                            tol=newton_tol)
                except SolverError:
                    # representability estimate was optimistic; the phase
                    # path decides
                    ph = solve_phase_newton(config, grid, s, init=prev_phase,
                                            tol=newton_tol)
                    density = None
            else:
                ph = solve_phase_newton(config, grid, s, init=prev_phase,
                                        tol=newton_tol)
                density = None
        except (SolverError, NonConvergenceError, InputError) as exc:
            return SweepResult(tuple(entries),
                               {"sigma": s, "kind": type(exc).__name__,
                                "error": str(exc)})
        entries.append(SweepEntry(sigma=s, density=density, phase=ph))
        prev_phase = ph
    return SweepResult(tuple(entries), None)
