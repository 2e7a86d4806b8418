"""Shared shortcuts for the test suite: small solves on small grids."""

from motorlab.discretize import Grid, assemble_operator
from motorlab.steady_solver import solve_null_vector, solve_phase_newton


def solve_density(config, sigma, cells):
    op = assemble_operator(config, Grid(cells), sigma)
    return solve_null_vector(op, config.normalization)


def solve_phase(config, sigma, cells, **kw):
    return solve_phase_newton(config, Grid(cells), sigma, **kw)
