"""Potentials, switching rates, sign regions, and assumption certification."""

import numpy as np
import pytest

from motorlab import demos
from motorlab.errors import InputError
from motorlab.model import (
    ConstantRate,
    CosineSlopePotential,
    LinearPotential,
    ModelConfig,
    Normalization,
    PotentialSet,
    Regime,
    ShiftedCopyPotential,
    SmoothBumpRate,
    SmoothedSawtoothPotential,
    SampledPotential,
    TiltedPotential,
    TransitionRates,
    check_assumptions,
    decompose_regions,
    eval_potential,
    negative_slope_intervals,
    smoothstep,
    validate_rates,
)

_SAW = SmoothedSawtoothPotential(periods=3, rise_fraction=0.8, amplitude=1.0,
                                 smoothing_width=0.01, shift=-1.0 / 60.0)
_XS = np.linspace(0.0, 1.0, 97)

PRESETS = {
    "linear": LinearPotential(1.3),
    "cosine": CosineSlopePotential(amplitude=1.0, frequency=2),
    "scaled_lobe": CosineSlopePotential(amplitude=1.0, negative_lobe_scale=0.25),
    "sawtooth": _SAW,
    "shifted_copy": ShiftedCopyPotential(_SAW, 1.0 / 6.0),
    "tilted": TiltedPotential(CosineSlopePotential(amplitude=0.3), 0.1),
    "sampled": SampledPotential(_XS, np.sin(2.0 * np.pi * _XS) / (2.0 * np.pi)),
}


# --- potentials --------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_slope_is_the_value_derivative(name):
    pot = PRESETS[name]
    x = np.linspace(0.003, 0.997, 211)
    step = 1e-6
    fd = (pot.value(x + step) - pot.value(x - step)) / (2.0 * step)
    assert np.abs(pot.slope(x) - fd).max() < 2e-5


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_curvature_is_the_slope_derivative(name):
    pot = PRESETS[name]
    x = np.linspace(0.003, 0.997, 211)
    step = 1e-6
    fd = (pot.slope(x + step) - pot.slope(x - step)) / (2.0 * step)
    scale = 1.0 + np.abs(pot.curvature(x)).max()
    assert np.abs(pot.curvature(x) - fd).max() < 1e-3 * scale


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_value_accumulates_the_slope(name):
    pot = PRESETS[name]
    x = np.linspace(0.0, 1.0, 20001)
    integral = np.trapezoid(pot.slope(x), x)
    assert abs((pot.value(np.array([1.0]))[0]
                - pot.value(np.array([0.0]))[0]) - integral) < 1e-7


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_evaluation_is_deterministic(name):
    pot = PRESETS[name]
    x = np.linspace(0.0, 1.0, 57)
    assert np.array_equal(pot.value(x), pot.value(x))
    assert np.array_equal(pot.slope(x), pot.slope(x))


def test_unit_cosine_has_closed_form():
    pot = CosineSlopePotential(amplitude=1.0, frequency=1)
    x = np.linspace(0.0, 1.0, 301)
    assert np.abs(pot.slope(x) - np.cos(2.0 * np.pi * x)).max() < 1e-12
    assert np.abs(pot.value(x) - np.sin(2.0 * np.pi * x)
                  / (2.0 * np.pi)).max() < 1e-12


def test_sawtooth_period_and_slopes():
    # rise over 0.8 of a 1/3 period carries the unit amplitude up, the
    # remaining 0.2 carries it back down
    assert _SAW.period == pytest.approx(1.0 / 3.0)
    assert _SAW.rise_slope == pytest.approx(1.0 / (0.8 / 3.0))
    assert _SAW.fall_slope == pytest.approx(-1.0 / (0.2 / 3.0))
    x = np.linspace(0.0, 1.0 - 1.0 / 3.0, 401)
    shiftwise = _SAW.value(x + 1.0 / 3.0) - _SAW.value(x)
    assert np.abs(shiftwise).max() < 1e-9


def test_shifted_copy_translates_the_pattern():
    copy = ShiftedCopyPotential(_SAW, 1.0 / 6.0)
    x = np.linspace(0.0, 0.5, 301)
    assert np.abs(copy.slope(x) - _SAW.slope(x + 1.0 / 6.0)).max() < 1e-12


def test_tilted_adds_a_constant_drift():
    base = CosineSlopePotential(amplitude=0.3)
    tilted = TiltedPotential(base, 0.1)
    x = np.linspace(0.0, 1.0, 101)
    assert np.abs(tilted.slope(x) - base.slope(x) - 0.1).max() < 1e-14


def test_smoothstep_endpoints_and_monotonicity():
    u = np.linspace(-0.5, 1.5, 401)
    s = smoothstep(u)
    assert s[0] == 0.0 and s[-1] == 1.0
    assert smoothstep(np.array([0.5]))[0] == pytest.approx(0.5)
    assert np.all(np.diff(s) >= 0.0)


def test_eval_potential_dispatches_orders():
    pot = PotentialSet((LinearPotential(2.0), CosineSlopePotential(1.0)))
    x = np.linspace(0.0, 1.0, 11)
    assert np.array_equal(eval_potential(pot, 0, x, order=0), 2.0 * x)
    assert np.array_equal(eval_potential(pot, 1, x, order=1),
                          pot.species[1].slope(x))
    assert np.array_equal(eval_potential(pot, 0, x, order=2), np.zeros(11))
    with pytest.raises(InputError):
        eval_potential(pot, 0, x, order=3)


def test_potential_set_envelopes():
    pot = PotentialSet((LinearPotential(1.0), LinearPotential(-0.5)))
    x = np.linspace(0.0, 1.0, 7)
    assert np.all(pot.min_slope(x) == -0.5)
    assert np.all(pot.max_slope(x) == 1.0)
    assert pot.slopes_at(x).shape == (2, 7)


# --- switching rates ----------------------------------------------------------


def test_constant_rates_derive_the_diagonal():
    rates = TransitionRates.constant([[0.0, 2.0], [3.0, 0.0]])
    m = rates.matrix_at(np.array([0.2, 0.8]))
    # column j's diagonal collects everything leaving species j
    assert np.all(m[0, 0] == 3.0) and np.all(m[1, 1] == 2.0)
    assert np.all(m[0, 1] == 2.0) and np.all(m[1, 0] == 3.0)
    assert rates.lower_bound_k == 2.0


def test_strong_regime_scales_by_one_over_sigma():
    rates = TransitionRates.constant([[0.0, 1.0], [1.0, 0.0]],
                                     regime=Regime.STRONG, lower_bound_k=1.0)
    x = np.array([0.5])
    assert rates.effective_matrix_at(x, 0.01)[0, 1, 0] == pytest.approx(100.0)
    assert rates.matrix_at(x)[0, 1, 0] == 1.0


def test_rate_entries_must_be_square_and_complete():
    with pytest.raises(InputError):
        TransitionRates(2, ((None, ConstantRate(1.0)),))
    with pytest.raises(InputError):
        TransitionRates(2, ((None, None), (ConstantRate(1.0), None)))


def test_bump_rate_support_and_plateau():
    bump = SmoothBumpRate(center=0.5, width=0.2, height=2.0)
    x = np.array([0.39, 0.5, 0.61, 0.0, 1.0])
    vals = bump(x)
    assert vals[1] == pytest.approx(2.0)
    assert np.all(vals[[0, 2, 3, 4]] < 1e-12)
    with pytest.raises(InputError):
        SmoothBumpRate(center=0.5, width=0.0, height=1.0)
    with pytest.raises(InputError):
        SmoothBumpRate(center=0.5, width=0.2, height=1.0, plateau_fraction=1.0)


def test_validate_rates_passes_every_shipped_config():
    for name, config in demos.shipped_configs().items():
        report = validate_rates(config.rates)
        assert report.valid, (name, report.violations)


def test_validate_rates_flags_inconsistent_diagonal():
    rates = TransitionRates.constant([[5.0, 1.0], [1.0, 0.0]],
                                     explicit_diagonal=True)
    report = validate_rates(rates)
    assert not report.valid
    assert any(v["condition"] == "diagonal_column_sum"
               for v in report.violations)


def test_validate_rates_flags_negative_entries():
    rates = TransitionRates.constant([[0.0, -0.5], [1.0, 0.0]])
    conditions = {v["condition"] for v in validate_rates(rates).violations}
    assert "nonnegative_entries" in conditions
    assert "offdiagonal_lower_bound" in conditions


def test_validate_rates_flags_bound_and_species_count():
    low = TransitionRates.constant([[0.0, 2.0], [2.0, 0.0]], lower_bound_k=3.0)
    assert any(v["condition"] == "offdiagonal_lower_bound"
               for v in validate_rates(low).violations)
    wide = TransitionRates.constant(np.ones((3, 3)), regime=Regime.STRONG,
                                    lower_bound_k=1.0)
    assert any(v["condition"] == "strong_regime_species_count"
               for v in validate_rates(wide).violations)


# --- regions -------------------------------------------------------------------


def test_unit_cosine_regions():
    regions = decompose_regions(demos.cosine_pair().potentials)
    assert len(regions.j_intervals) == 2
    assert len(regions.k_intervals) == 1
    (a1, b1), (a2, b2) = regions.j_intervals
    assert a1 <= 1e-8 and b1 == pytest.approx(0.25, abs=1e-6)
    assert a2 == pytest.approx(0.75, abs=1e-6) and b2 >= 1.0 - 1e-8
    (ka, kb), = regions.k_intervals
    assert ka == pytest.approx(0.25, abs=1e-6)
    assert kb == pytest.approx(0.75, abs=1e-6)


def test_sawtooth_pair_has_no_common_descent():
    pot = demos.sawtooth_pair().potentials
    regions = decompose_regions(pot)
    assert regions.k_intervals == ()
    a1, b1 = regions.j_intervals[0]
    # the first common ascent must contain the concentration window [0, 0.05]
    assert a1 <= 1e-8 and b1 > 0.08


def test_regions_cover_the_domain():
    regions = decompose_regions(demos.sawtooth_pair().potentials)
    pieces = sorted(list(regions.j_intervals) + list(regions.k_intervals)
                    + list(regions.neutral_intervals))
    assert pieces[0][0] <= 1e-8 and pieces[-1][1] >= 1.0 - 1e-8
    for (_, b), (a, _) in zip(pieces, pieces[1:]):
        assert a - b < 1e-5         # no uncovered gap wider than the tolerance
        assert b - a < 1e-8         # no overlap


def test_negative_slope_intervals_unit_cosine():
    pot = demos.cosine_pair().potentials
    (a, b), = negative_slope_intervals(pot, 0)
    assert a == pytest.approx(0.25, abs=1e-6)
    assert b == pytest.approx(0.75, abs=1e-6)


def test_label_nodes_matches_intervals():
    regions = decompose_regions(demos.cosine_pair().potentials)
    labels = regions.label_nodes(np.array([0.1, 0.5, 0.9]))
    assert list(labels) == ["j", "k", "j"]


# --- assumptions ----------------------------------------------------------------


def test_applicable_constructions_per_shipped_config():
    expected = {
        "linear": "piecewise",
        "flat": None,
        "cosine_pair": "piecewise",
        "sawtooth": "piecewise",
        "strong": "strong",
        "vanishing": "vanishing",
    }
    priority = ("strong", "vanishing", "piecewise", "bounded")
    for name, config in demos.shipped_configs().items():
        regions = decompose_regions(config.potentials)
        report = check_assumptions(config, regions)
        selected = next((k for k in priority if report.applicable[k]), None)
        assert selected == expected[name], (name, report.applicable)


def test_flat_config_fails_ascent_assumption():
    config = demos.flat_single()
    report = check_assumptions(config, decompose_regions(config.potentials))
    assert not report.flags["ascent_regions_exist"]
    assert not report.flags["max_slope_positive"]
    with pytest.raises(InputError):
        report.require("bounded")


def test_vanishing_handoff_needs_a_partner_channel():
    config = demos.vanishing_pair()
    regions = decompose_regions(config.potentials)
    assert check_assumptions(config, regions).flags["descent_handoff"]
    # moving the drain channel away from the descent endpoint breaks it
    broken = ModelConfig(
        config.potentials,
        TransitionRates(2, (
            (None, SmoothBumpRate(center=0.3, width=0.1, height=0.25)),
            (SmoothBumpRate(center=0.85, width=0.10, height=0.2), None),
        ), regime=Regime.VANISHING, lower_bound_k=0.0),
        config.normalization, title="broken")
    report = check_assumptions(broken, regions)
    assert not report.flags["descent_handoff"]
    assert not report.applicable["vanishing"]


def test_model_config_checks_species_counts():
    with pytest.raises(InputError):
        ModelConfig(PotentialSet((LinearPotential(1.0),)),
                    TransitionRates.constant([[0.0, 1.0], [1.0, 0.0]]),
                    Normalization.UNIT_AT_ORIGIN)
