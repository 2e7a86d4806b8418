"""Finite-volume discretization with exponentially fitted interface fluxes.

Unknowns live on the N+1 nodes of a uniform vertex-centered grid; each row
of the assembled operator is the integrated balance of one control volume
(half cells at the two boundaries, where the physical no-flux condition
closes the balance).  The interface flux uses the Bernoulli-weighted
two-point formula

    flux = (sigma/h) * (B(t) n_left - B(-t) n_right),
    t = (psi_right - psi_left)/sigma,

which is exact whenever the density is proportional to exp(-psi/sigma) on
the cell; that exactness is what lets the solver hold boundary layers on
grids with h comparable to sigma.

Row/column ordering is node-major: unknown (species i, node m) sits at
index m*I + i, so switching couplings are block-diagonal and diffusion
sits I off the diagonal.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from motorlab.errors import InputError
from motorlab.kernels import bernoulli


@dataclass(frozen=True)
class Grid:
    """Uniform nodes on [0,1]; volumes are h except h/2 at the two ends."""

    cells: int

    def __post_init__(self):
        if self.cells < 4:
            raise InputError("grid needs at least 4 cells")

    @property
    def h(self):
        return 1.0 / self.cells

    @property
    def node_count(self):
        return self.cells + 1

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.cells + 1)

    @property
    def volumes(self):
        v = np.full(self.cells + 1, self.h)
        v[0] = 0.5 * self.h
        v[-1] = 0.5 * self.h
        return v


def build_grid(cells):
    return Grid(int(cells))


def sweep_grid_cells(sigma_min, floor=512):
    """Resolution contract for sigma sweeps: h well below the layer width."""
    if sigma_min <= 0.0:
        raise InputError("sigma_min must be positive")
    return max(int(floor), int(np.ceil(8.0 / sigma_min)))


@dataclass(frozen=True)
class SparseOperator:
    """Assembled stationary operator plus the pieces needed to audit it.

    matrix: CSC, shape (I*(N+1), I*(N+1)), node-major.
    bern_plus/bern_minus: per-species interface weights B(t), B(-t), shape (I, N).
    rate_tensor: effective switching rates at nodes, shape (I, I, N+1)
      (diagonal = total outflow, off-diagonal [i, j] = j -> i channel).
    """

    matrix: sp.csc_matrix
    grid: Grid
    species_count: int
    sigma: float
    bern_plus: np.ndarray
    bern_minus: np.ndarray
    rate_tensor: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape

    def interface_flux(self, densities):
        """Per-species interface fluxes of a nodal density array (I, N+1)."""
        n = np.asarray(densities)
        coeff = self.sigma / self.grid.h
        return coeff * (self.bern_plus * n[:, :-1] - self.bern_minus * n[:, 1:])

    def apply(self, densities):
        """Integrated cell balances of a density array, reshaped to (I, N+1)."""
        I = self.species_count
        flat = np.asarray(densities).reshape(I, -1).T.ravel()
        out = self.matrix @ flat
        return out.reshape(-1, I).T


def assemble_operator(config, grid, sigma):
    """Build the stationary finite-volume operator for one diffusion value."""
    if sigma <= 0.0:
        raise InputError("sigma must be positive")
    I = config.species_count
    nodes = grid.nodes
    h = grid.h
    vol = grid.volumes
    M = grid.node_count

    psi = config.potentials.values_at(nodes)            # (I, M)
    t = np.diff(psi, axis=1) / sigma                    # (I, N)
    bp = bernoulli(t)
    bm = bernoulli(-t)
    nu = config.rates.effective_matrix_at(nodes, sigma)  # (I, I, M)

    coeff = sigma / h
    rows, cols, vals = [], [], []

    def idx(i, m):
        return m * I + i

    for i in range(I):
        up = coeff * bp[i]    # multiplies n_{i,m}   in flux at interface m
        dn = coeff * bm[i]    # multiplies n_{i,m+1} in flux at interface m
        for m in range(M):
            diag = 0.0
            if m < M - 1:     # outgoing flux through the right interface
                diag += up[m]
                rows.append(idx(i, m)); cols.append(idx(i, m + 1)); vals.append(-dn[m])
            if m > 0:         # incoming flux through the left interface
                diag += dn[m - 1]
                rows.append(idx(i, m)); cols.append(idx(i, m - 1)); vals.append(-up[m - 1])
            rows.append(idx(i, m)); cols.append(idx(i, m)); vals.append(diag)

    # switching block: + v_m nu_ii n_i - v_m nu_ij n_j, diagonal per column
    for m in range(M):
        for i in range(I):
            rows.append(idx(i, m)); cols.append(idx(i, m)); vals.append(vol[m] * nu[i, i, m])
            for j in range(I):
                if j != i:
                    rows.append(idx(i, m)); cols.append(idx(j, m)); vals.append(-vol[m] * nu[i, j, m])

    matrix = sp.csc_matrix((vals, (rows, cols)), shape=(I * M, I * M))
    return SparseOperator(matrix=matrix, grid=grid, species_count=I, sigma=sigma,
                          bern_plus=bp, bern_minus=bm, rate_tensor=nu)


def adjoint_consistency(op):
    """How far the transpose is from annihilating the all-ones vector.

    Mass exchange between species cancels columnwise and interface fluxes
    appear in exactly two balances with opposite signs, so the exact
    operator satisfies ones @ matrix = 0; the return value is the max
    column-sum magnitude normalized by the largest matrix entry.
    """
    colsums = np.asarray(op.matrix.sum(axis=0)).ravel()
    scale = np.abs(op.matrix.data).max() if op.matrix.nnz else 1.0
    return float(np.abs(colsums).max() / scale)
