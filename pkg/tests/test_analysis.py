"""Concentration splits, convergence tables, inequality checks, reports."""

import json

import numpy as np
import pytest

from motorlab import demos
from motorlab.analysis import (
    check_corollary_conditions,
    concentration_from_phase,
    concentration_masses,
    convergence_study,
    motor_effect_report,
)
from motorlab.discretize import Grid
from motorlab.errors import InputError
from motorlab.hj_limit import limit_piecewise
from motorlab.model import Normalization, decompose_regions
from motorlab.phase import to_phase

from helpers import solve_density, solve_phase


# --- concentration ---------------------------------------------------------------


def test_mass_split_is_exact_off_the_grid():
    density = solve_density(demos.sawtooth_pair(), 0.05, 200)
    # 0.0437 is not a node of a 200-cell grid
    report = concentration_masses(density, epsilon=0.0437)
    total = sum(report.masses_near_zero) + report.total_far_mass
    mass = density.renormalized(Normalization.UNIT_MASS)
    whole = float(np.trapezoid(mass.values.sum(axis=0), mass.grid.nodes))
    assert total == pytest.approx(whole, abs=1e-15)
    assert report.rho_estimates == report.masses_near_zero


def test_concentration_rejects_cutoffs_outside_the_domain():
    density = solve_density(demos.linear_single(), 0.1, 64)
    for eps in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(InputError):
            concentration_masses(density, epsilon=eps)


def test_density_and_phase_splits_agree():
    config = demos.sawtooth_pair()
    density = solve_density(config, 0.02, 512)
    a = concentration_masses(density)
    b = concentration_from_phase(to_phase(density))
    assert a.total_far_mass == pytest.approx(b.total_far_mass, rel=1e-10)
    for x, y in zip(a.masses_near_zero, b.masses_near_zero):
        assert x == pytest.approx(y, rel=1e-10)


def test_concentration_sharpens_as_sigma_drops():
    config = demos.sawtooth_pair()
    far = [concentration_masses(solve_density(config, s, 512)).total_far_mass
           for s in (0.1, 0.05, 0.02)]
    assert far[0] > far[1] > far[2]


# --- convergence table -----------------------------------------------------------


def test_convergence_study_tracks_the_limit():
    config = demos.sawtooth_pair()
    grid = Grid(512)
    regions = decompose_regions(config.potentials)
    limit = limit_piecewise(config.potentials, regions, grid)
    table = convergence_study(config, grid, [0.05, 0.02], limit)
    assert table.ok
    assert len(table.rows) == 2
    worst = table.worst_errors()
    assert worst[1] < worst[0]
    assert table.fitted_rate is not None and table.fitted_rate > 0.0
    doc = table.describe()
    assert doc["rows"][0]["sigma"] == 0.05
    json.dumps(doc)


def test_convergence_study_records_truncation():
    config = demos.sawtooth_pair()
    grid = Grid(512)
    regions = decompose_regions(config.potentials)
    limit = limit_piecewise(config.potentials, regions, grid)
    table = convergence_study(config, grid, [0.05, 0.02], limit,
                              newton_tol=1e-18)
    assert not table.ok
    assert table.failure["kind"] == "NonConvergenceError"
    assert len(table.rows) < 2


def test_convergence_study_needs_sigmas():
    config = demos.linear_single()
    grid = Grid(64)
    regions = decompose_regions(config.potentials)
    limit = limit_piecewise(config.potentials, regions, grid)
    with pytest.raises(InputError):
        convergence_study(config, grid, [], limit)


def test_exactness_floor_suppresses_the_rate_fit():
    # the linear ramp is reproduced exactly at every sigma, so there is no
    # decaying error to fit
    config = demos.linear_single()
    grid = Grid(128)
    regions = decompose_regions(config.potentials)
    limit = limit_piecewise(config.potentials, regions, grid)
    table = convergence_study(config, grid, [0.1, 0.05], limit)
    assert table.ok
    assert table.fitted_rate is None
    assert "floor" in table.rate_note


# --- inequality conditions ---------------------------------------------------------


def test_corollary_conditions_unit_cosine():
    config = demos.cosine_pair()
    regions = decompose_regions(config.potentials)
    report = check_corollary_conditions(config.potentials, regions,
                                        config.rates)
    # one descent of weight 1/pi against ascents of weight 1/(2 pi) each
    assert report.pair_counts == (1, 2)
    assert not report.pairing_mismatch
    pair = report.pairs[0]
    assert pair["descent_integral"] == pytest.approx(1.0 / np.pi, abs=1e-6)
    assert pair["ascent_integral"] == pytest.approx(1.0 / (2.0 * np.pi),
                                                    abs=1e-6)
    assert not pair["ok"]
    assert not report.pairwise_ok
    assert report.origin_starts_ascent


def test_corollary_conditions_quarter_lobe():
    config = demos.quarter_lobe_pair()
    regions = decompose_regions(config.potentials)
    report = check_corollary_conditions(config.potentials, regions,
                                        config.rates)
    pair = report.pairs[0]
    assert pair["descent_integral"] == pytest.approx(1.0 / (4.0 * np.pi),
                                                     abs=1e-6)
    assert pair["ascent_integral"] == pytest.approx(1.0 / (2.0 * np.pi),
                                                    abs=1e-6)
    assert report.pairwise_ok


def test_aggregate_condition_uses_the_rate_floor():
    config = demos.cosine_pair()
    regions = decompose_regions(config.potentials)
    report = check_corollary_conditions(config.potentials, regions,
                                        config.rates)
    # sqrt(k) * |K| = 1 * 0.5 against 2/(2 pi)
    assert report.aggregate_lhs == pytest.approx(0.5, abs=1e-6)
    assert report.aggregate_rhs == pytest.approx(1.0 / np.pi, abs=1e-6)
    assert not report.aggregate_ok


# --- composite report ----------------------------------------------------------------


def test_motor_effect_report_for_the_ratchet():
    config = demos.sawtooth_pair()
    doc = motor_effect_report(config, Grid(512), 0.02)
    assert doc["title"] == "sawtooth"
    assert doc["motor_effect"] is True
    assert doc["solution_path"] == "density"
    assert doc["limit_comparison"]["construction"] == "piecewise"
    assert doc["flux_bounds"]["ok"] is True
    assert doc["conditions"]["pairwise_ok"] is True
    json.dumps(doc)


def test_motor_effect_report_for_the_flat_profile():
    config = demos.flat_single()
    doc = motor_effect_report(config, Grid(128), 0.05)
    # nothing concentrates without a potential gradient
    assert doc["motor_effect"] is False
    assert doc["limit_comparison"] is None
    assert doc["concentration"]["total_far_mass"] > 0.9
    json.dumps(doc)
