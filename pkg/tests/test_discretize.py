"""Grid geometry and the exponentially fitted finite-volume operator."""

import numpy as np
import pytest

from motorlab import demos
from motorlab.discretize import (
    Grid,
    adjoint_consistency,
    assemble_operator,
    build_grid,
    sweep_grid_cells,
)
from motorlab.errors import InputError
from motorlab.model import (
    LinearPotential,
    ModelConfig,
    Normalization,
    PotentialSet,
    SampledPotential,
    TransitionRates,
)
from motorlab.steady_solver import solve_null_vector


def test_grid_geometry():
    grid = Grid(8)
    assert grid.node_count == 9
    assert grid.h == pytest.approx(0.125)
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 1.0
    # boundary control volumes are half cells
    assert grid.volumes[0] == pytest.approx(grid.h / 2.0)
    assert grid.volumes[4] == pytest.approx(grid.h)
    assert grid.volumes.sum() == pytest.approx(1.0)


def test_grid_rejects_tiny_cell_counts():
    with pytest.raises(InputError):
        Grid(3)


def test_sweep_grid_cells_resolves_the_smallest_sigma():
    assert sweep_grid_cells(0.05) == 512          # floor wins
    assert sweep_grid_cells(0.002) == 4000        # 8 / sigma wins
    assert sweep_grid_cells(0.002, floor=8192) == 8192
    with pytest.raises(InputError):
        sweep_grid_cells(0.0)


def test_build_grid_coerces_cell_counts():
    assert build_grid(256).cells == 256
    assert build_grid(256.0).cells == 256


def test_assemble_rejects_nonpositive_sigma():
    config = demos.linear_single()
    with pytest.raises(InputError):
        assemble_operator(config, Grid(16), 0.0)


@pytest.mark.parametrize("name", sorted(demos.shipped_configs()))
@pytest.mark.parametrize("sigma", [0.05, 0.01])
def test_transpose_annihilates_constants(name, sigma):
    config = demos.shipped_configs()[name]
    op = assemble_operator(config, Grid(256), sigma)
    assert adjoint_consistency(op) < 2e-13


def test_single_species_steady_state_is_flux_free():
    # with one species the solved steady state must zero every interface flux
    config = demos.linear_single()
    op = assemble_operator(config, Grid(128), 0.05)
    density = solve_null_vector(op, config.normalization)
    flux = op.interface_flux(density.values)
    scale = np.abs(density.values).max() * op.sigma / op.grid.h
    assert np.abs(flux).max() < 1e-12 * scale


def test_single_species_matches_boltzmann_profile():
    config = demos.linear_single()
    grid = Grid(256)
    sigma = 0.05
    op = assemble_operator(config, grid, sigma)
    density = solve_null_vector(op, config.normalization)
    exact = np.exp(-grid.nodes / sigma)
    rel = np.abs(density.values[0] / exact - 1.0)
    # the fitted scheme reproduces the constant-slope Boltzmann factor exactly
    assert rel.max() < 1e-11


def _manufactured_config():
    # smooth manufactured potentials so the truncation term is the whole error
    xs = np.linspace(0.0, 1.0, 4097)
    v1 = np.sin(2.0 * np.pi * xs) / (2.0 * np.pi)
    v2 = -np.cos(2.0 * np.pi * xs) / (4.0 * np.pi)
    pot = PotentialSet((SampledPotential(xs, v1), SampledPotential(xs, v2)))
    rates = TransitionRates.constant([[0.0, 1.0], [1.0, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_MASS, title="mms")


def test_interior_convergence_is_second_order():
    config = _manufactured_config()
    sigma = 0.05

    def interior_error(cells):
        ref_cells = 4096
        op = assemble_operator(config, Grid(cells), sigma)
        density = solve_null_vector(op, config.normalization)
        ref = solve_null_vector(
            assemble_operator(config, Grid(ref_cells), sigma),
            config.normalization)
        stride = ref_cells // cells
        diff = density.values - ref.values[:, ::stride]
        return np.abs(diff[:, 1:-1]).max()

    e1 = interior_error(128)
    e2 = interior_error(256)
    assert 3.2 < e1 / e2 < 4.8


def test_operator_apply_matches_matrix_action():
    config = demos.cosine_pair()
    op = assemble_operator(config, Grid(64), 0.1)
    rng = np.random.default_rng(7)
    n = rng.uniform(0.1, 1.0, size=(2, op.grid.node_count))
    direct = op.matrix @ n.T.ravel()
    assert np.abs(op.apply(n).T.ravel() - direct).max() < 1e-14
