"""Limit profiles, the effective Hamiltonian, and regime certificates."""

import numpy as np
import pytest

from motorlab import demos
from motorlab.discretize import Grid
from motorlab.errors import InputError
from motorlab.hj_limit import (
    BranchLabel,
    HamiltonianParams,
    LimitProfile,
    effective_hamiltonian,
    hj_residual,
    limit_bounded,
    limit_piecewise,
    limit_strong,
    limit_vanishing_bounds,
    solve_ham_roots,
)
from motorlab.model import (
    RegionDecomposition,
    Regime,
    check_assumptions,
    decompose_regions,
)


def _certified(config):
    regions = decompose_regions(config.potentials)
    return regions, check_assumptions(config, regions)


# --- profile container ------------------------------------------------------------


def test_limit_profile_must_integrate_its_slopes():
    grid = Grid(8)
    slopes = np.ones(9)
    labels = np.full(9, BranchLabel.MIN_PLUS.value)
    with pytest.raises(InputError):
        LimitProfile(grid, grid.nodes + 0.1, slopes, labels)
    with pytest.raises(InputError):
        LimitProfile(grid, 2.0 * grid.nodes, slopes, labels)


# --- bounded and piecewise constructions -------------------------------------------


def test_bounded_limit_needs_a_certificate():
    config = demos.linear_single()
    with pytest.raises(InputError):
        limit_bounded(config.potentials, Grid(16))


def test_bounded_limit_of_the_linear_ramp_is_identity():
    config = demos.linear_single()
    grid = Grid(64)
    _, report = _certified(config)
    profile = limit_bounded(config.potentials, grid, assumptions=report)
    assert np.abs(profile.r_values - grid.nodes).max() < 1e-14
    assert set(profile.branch_labels) == {BranchLabel.MIN_PLUS.value}


def test_flat_potential_cannot_certify_the_bounded_construction():
    config = demos.flat_single()
    _, report = _certified(config)
    with pytest.raises(InputError):
        limit_bounded(config.potentials, Grid(16), assumptions=report)


def test_piecewise_equals_bounded_without_common_descents():
    # the ratchet pair never descends jointly, so the two constructions
    # paint the same profile
    config = demos.sawtooth_pair()
    grid = Grid(240)
    regions, report = _certified(config)
    assert regions.k_intervals == ()
    a = limit_bounded(config.potentials, grid, assumptions=report)
    b = limit_piecewise(config.potentials, regions, grid)
    assert np.abs(a.r_values - b.r_values).max() < 1e-8


def test_piecewise_cosine_recovers_the_antiderivative():
    config = demos.cosine_pair()
    grid = Grid(512)
    regions, _ = _certified(config)
    profile = limit_piecewise(config.potentials, regions, grid)
    exact = np.sin(2.0 * np.pi * grid.nodes) / (2.0 * np.pi)
    assert np.abs(profile.r_values - exact).max() < 2e-5
    labels = profile.branch_labels
    assert labels[np.searchsorted(grid.nodes, 0.1)] == BranchLabel.MIN_PLUS.value
    assert labels[np.searchsorted(grid.nodes, 0.5)] == BranchLabel.MAX_NEG.value


def test_piecewise_rejects_unresolvable_regions():
    regions = RegionDecomposition(
        j_intervals=((0.301, 0.302),), k_intervals=(),
        neutral_intervals=((0.0, 0.301), (0.302, 1.0)),
        neutral_points=(), detection_tolerance=1e-9)
    config = demos.cosine_pair()
    with pytest.raises(InputError):
        limit_piecewise(config.potentials, regions, Grid(10))


# --- effective Hamiltonian -----------------------------------------------------------


def test_hamiltonian_vanishes_at_zero_momentum():
    rng = np.random.default_rng(17)
    for _ in range(200):
        params = HamiltonianParams(*rng.uniform(-3.0, 3.0, size=2),
                                   *rng.uniform(1e-3, 2.0, size=2))
        assert abs(effective_hamiltonian(0.0, params)) < 1e-14


def test_hamiltonian_rejects_nonpositive_rates():
    with pytest.raises(InputError):
        HamiltonianParams(1.0, -1.0, 0.0, 1.0)


def test_roots_all_sit_on_the_zero_level_set():
    rng = np.random.default_rng(29)
    for _ in range(200):
        params = HamiltonianParams(*rng.uniform(-3.0, 3.0, size=2),
                                   *rng.uniform(1e-3, 2.0, size=2))
        roots = solve_ham_roots(params)
        assert 0.0 in roots
        assert roots == sorted(roots)
        scale = 1.0 + params.nu1 + params.nu2
        for p in roots:
            assert abs(effective_hamiltonian(p, params)) < 1e-9 * scale


def test_roots_equal_slope_case():
    # shared slope c, equal rates: H(p) = p^2 - c p, zeros exactly {0, c};
    # the other quartic factor carries beta1 + beta2 = 2 nu > 0 and is cut
    c, nu = 1.5, 0.4
    roots = solve_ham_roots(HamiltonianParams(c, c, nu, nu))
    assert len(roots) == 2
    assert abs(roots[0] - 0.0) < 1e-10
    assert abs(roots[1] - c) < 1e-10


def test_roots_antisymmetric_slope_case():
    # slopes +-a, equal rates: beta1*beta2 - nu^2 = p^2 (p^2 - a^2 - 2 nu),
    # and the nonzero candidates have beta1 + beta2 = 2(a^2 + nu) > 0
    a, nu = 2.0, 0.5
    roots = solve_ham_roots(HamiltonianParams(a, -a, nu, nu))
    assert roots == [0.0]


# --- strong regime --------------------------------------------------------------------


def test_strong_limit_guards_its_regime():
    config = demos.cosine_pair()
    regions = decompose_regions(config.potentials)
    with pytest.raises(InputError):
        limit_strong(config, regions, Grid(32))


def test_strong_limit_selects_hamiltonian_roots():
    config = demos.strong_pair()
    grid = Grid(200)
    regions = decompose_regions(config.potentials)
    profile, cert = limit_strong(config, regions, grid)
    x = grid.nodes
    slopes = config.potentials.slopes_at(x)
    nu1 = config.rates.offdiag_at(1, 0, x)
    nu2 = config.rates.offdiag_at(0, 1, x)
    worst = 0.0
    for m in range(0, grid.node_count, 7):
        params = HamiltonianParams(float(slopes[0, m]), float(slopes[1, m]),
                                   float(nu1[m]), float(nu2[m]))
        worst = max(worst, abs(effective_hamiltonian(
            profile.slope_values[m], params)))
    assert worst < 1e-9
    ok, margin, count = cert.evaluate(profile.slope_values, 1e-9)
    assert ok and count == 0
    desc = cert.describe()
    assert desc["sqrt_k"] == pytest.approx(np.sqrt(0.07))
    assert 0.0 < desc["j_fraction"] < 1.0


# --- vanishing regime -----------------------------------------------------------------


def test_vanishing_bounds_guard_their_regime():
    with pytest.raises(InputError):
        limit_vanishing_bounds(demos.cosine_pair(), Grid(32))


def test_vanishing_corridors_for_the_shipped_pair():
    config = demos.vanishing_pair()
    grid = Grid(400)
    bounds = limit_vanishing_bounds(config, grid)
    assert [c.species for c in bounds.constraints] == [0, 1]
    ramp, wave = bounds.constraints
    # the ramp never descends: slope floor 0 everywhere, no cap
    assert not ramp.descent_mask.any()
    assert np.all(ramp.lower == 0.0) and np.all(np.isinf(ramp.upper))
    # the wave descends on its negative-slope arc with the slope as cap
    x = grid.nodes
    inside = (x > 0.26) & (x < 0.74)
    assert wave.descent_mask[inside].all()
    cos = np.cos(2.0 * np.pi * x)
    assert np.abs(wave.upper[inside] - cos[inside]).max() < 1e-9

    # the potential's own slope respects its corridor; a flat field breaks
    # the descent cap
    ok, _, count = wave.evaluate(cos, 1e-9)
    assert ok and count == 0
    bad_ok, _, bad_count = wave.evaluate(np.zeros(grid.node_count), 1e-9)
    assert not bad_ok and bad_count > 0

    on_j = (x > 0.01) & (x < 0.24)
    assert np.all(np.isfinite(bounds.j_equality_target[on_j]))
    assert np.abs(bounds.j_equality_target[on_j] - cos[on_j]).max() < 1e-9


def test_vanishing_bounds_require_the_handoff():
    config = demos.vanishing_pair()
    from motorlab.model import ModelConfig, SmoothBumpRate, TransitionRates
    broken = ModelConfig(
        config.potentials,
        TransitionRates(2, (
            (None, SmoothBumpRate(center=0.3, width=0.1, height=0.25)),
            (SmoothBumpRate(center=0.85, width=0.10, height=0.2), None),
        ), regime=Regime.VANISHING, lower_bound_k=0.0),
        config.normalization, title="broken")
    with pytest.raises(InputError) as err:
        limit_vanishing_bounds(broken, Grid(64))
    assert "species 2" in str(err.value)


# --- viscosity residual ----------------------------------------------------------------


def test_hj_residual_is_zero_on_single_branch_profiles():
    config = demos.linear_single()
    _, report = _certified(config)
    profile = limit_bounded(config.potentials, Grid(64), assumptions=report)
    rep = hj_residual(profile, config.potentials)
    assert rep.junction_nodes == ()
    assert rep.max_interior == 0.0
    assert rep.max_junction == 0.0


def test_hj_residual_flags_branch_changes():
    config = demos.cosine_pair()
    grid = Grid(512)
    regions, _ = _certified(config)
    profile = limit_piecewise(config.potentials, regions, grid)
    rep = hj_residual(profile, config.potentials)
    assert rep.max_interior < 1e-12
    assert len(rep.junction_nodes) > 0
    # junctions sit at the ascent/descent changeovers near 1/4 and 3/4
    xs = grid.nodes[list(rep.junction_nodes)]
    assert np.all((np.abs(xs - 0.25) < 0.01) | (np.abs(xs - 0.75) < 0.01))
