"""Ready-made configurations.

The builders here mirror the YAML files shipped under configs/ one-to-one
(tests compare the two), plus a few smaller setups used only by the test
suite.  Numeric choices that matter are commented where they are made.
"""

import numpy as np

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
    TiltedPotential,
    TransitionRates,
)

# Coupling strength for the flagship ratchet.  Measured over the
# 0.05..0.002 sweep at N=2048: the sup-norm distance to the limit profile
# falls strictly monotonically to ~0.032 at this value (weaker coupling
# converges slower, stronger coupling buys little), and the squared phase
# gap decays cleanly like sigma^2 whatever the coupling.
SAWTOOTH_COUPLING = 2.0


def linear_single(gradient=1.0):
    """One species on a uniform slope; closed-form density e^{-x*g/sigma}."""
    pot = PotentialSet((LinearPotential(gradient),))
    rates = TransitionRates(1, ((None,),), regime=Regime.BOUNDED, lower_bound_k=0.0)
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="linear")


def flat_single():
    """Zero drift; the stationary density is uniform and nothing concentrates."""
    pot = PotentialSet((LinearPotential(0.0),))
    rates = TransitionRates(1, ((None,),), regime=Regime.BOUNDED, lower_bound_k=0.0)
    return ModelConfig(pot, rates, Normalization.UNIT_MASS, title="flat")


def linear_pair(gradient=1.0, coupling=1.0):
    """Two identical linear species with symmetric switching (test-only)."""
    base = LinearPotential(gradient)
    pot = PotentialSet((base, LinearPotential(gradient)))
    rates = TransitionRates.constant([[0.0, coupling], [coupling, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="linear-pair")


def cosine_pair(coupling=1.0):
    """Two species sharing the slope cos(2 pi x), symmetric switching.

    The shared potential makes the joint solve exponentially fitted and
    exact (both densities are the same Gibbs profile), which pins the
    piecewise limit at sin(2 pi x)/(2 pi).
    """
    base = CosineSlopePotential(amplitude=1.0, frequency=1)
    pot = PotentialSet((base, CosineSlopePotential(amplitude=1.0, frequency=1)))
    rates = TransitionRates.constant([[0.0, coupling], [coupling, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="cosine-pair")


def amplitude_pair(coupling=1.0):
    """Cosine slopes with mismatched amplitudes (test-only).

    Unlike cosine_pair the two species see different potentials, so the
    solution is genuinely coupled and the convergence study has a real
    sigma-dependence to measure.
    """
    pot = PotentialSet((
        CosineSlopePotential(amplitude=1.0, frequency=1),
        CosineSlopePotential(amplitude=0.6, frequency=1),
    ))
    rates = TransitionRates.constant([[0.0, coupling], [coupling, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN,
                       title="amplitude-pair")


def quarter_lobe_pair(coupling=1.0):
    """Cosine pair with the negative lobe scaled to 1/4 (test-only).

    Shrinking the descending lobe tips the ascent/descent balance so the
    concentration condition holds: |integral over K of the max slope| =
    1/(4 pi) against 1/(2 pi) collected on the first ascent.
    """
    pot = PotentialSet((
        CosineSlopePotential(amplitude=1.0, negative_lobe_scale=0.25),
        CosineSlopePotential(amplitude=1.0, negative_lobe_scale=0.25),
    ))
    rates = TransitionRates.constant([[0.0, coupling], [coupling, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN,
                       title="quarter-lobe")


def sawtooth_pair(coupling=SAWTOOTH_COUPLING):
    """The flagship ratchet: two smoothed sawtooth potentials half a period
    apart.

    Geometry (period 1/3, rise fraction 0.8, blend width 0.01, pattern
    shifted by -1/60): both slopes are positive at x = 0 (value 3.75), the
    first common-ascent interval is [0, 0.0813), and the two species'
    descents never overlap, so the slope maximum stays positive on all of
    [0, 1] and the small-noise phase limit is the running integral of
    min(slope)_+ starting at 0.
    """
    base = SmoothedSawtoothPotential(periods=3, rise_fraction=0.8, amplitude=1.0,
                                     smoothing_width=0.01, shift=-1.0 / 60.0)
    pot = PotentialSet((base, ShiftedCopyPotential(base, 1.0 / 6.0)))
    rates = TransitionRates.constant([[0.0, coupling], [coupling, 0.0]])
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="sawtooth")


def strong_pair(amplitude=0.3, drift=0.1, nu=0.07):
    """Antiphase cosines, one tilted upward, with 1/sigma switching rates.

    The half-period offset makes the descents complementary and the tilt
    keeps the slope maximum at least drift/2 everywhere — no point is a
    descent for both species, which the slope floors require.  Two
    constraints pin the sizes: the walls must respect the -sqrt(nu) floor
    outright (zero flux forces each R_i' to equal its own slope there, so
    drift - amplitude >= -sqrt(nu) is structural), while the interior
    descents dip below it and are lifted only by the switching — which is
    the mechanism under test.
    """
    base = CosineSlopePotential(amplitude=amplitude, frequency=1)
    other = TiltedPotential(ShiftedCopyPotential(base, 0.5), drift)
    pot = PotentialSet((base, other))
    rates = TransitionRates.constant([[0.0, nu], [nu, 0.0]],
                                     regime=Regime.STRONG, lower_bound_k=nu)
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="strong")


def vanishing_pair():
    """Localized switching: species 2 is fed only deep inside species 1's
    ascent and drained just before its own descent ends.

    The 2 -> 1 channel is supported on [0.62, 0.76], covering a left
    neighborhood of species 2's descent endpoint at 3/4 (the handoff
    assumption); the 1 -> 2 channel sits on [0.80, 0.90] where species 1
    has already thinned to exp(-0.55/sigma) of its origin value, so the
    fed population stays a negligible fraction of the total mass.
    """
    pot = PotentialSet((
        LinearPotential(1.0),
        CosineSlopePotential(amplitude=1.0, frequency=1),
    ))
    feed = SmoothBumpRate(center=0.85, width=0.10, height=0.2)    # nu_21
    drain = SmoothBumpRate(center=0.69, width=0.14, height=0.25)  # nu_12
    entries = (
        (None, drain),
        (feed, None),
    )
    rates = TransitionRates(2, entries, regime=Regime.VANISHING, lower_bound_k=0.0)
    return ModelConfig(pot, rates, Normalization.UNIT_AT_ORIGIN, title="vanishing")


SHIPPED = {
    "linear": linear_single,
    "flat": flat_single,
    "cosine_pair": cosine_pair,
    "sawtooth": sawtooth_pair,
    "strong": strong_pair,
    "vanishing": vanishing_pair,
}


def shipped_configs():
    """Instantiate every configuration that ships as a YAML file."""
    return {name: builder() for name, builder in SHIPPED.items()}
