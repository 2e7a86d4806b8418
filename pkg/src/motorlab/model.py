"""Model layer: potentials, switching rates, and sign-region geometry.

Everything downstream (operator assembly, limit profiles, reports) consumes
the three ingredients defined here:

* smooth potentials on [0,1], evaluable with first and second derivatives;
* a matrix of nonnegative switching rates whose diagonal is tied to the
  off-diagonal column sums (total mass exchange balances pointwise);
* the decomposition of [0,1] into intervals where every species ascends
  (all slopes positive), every species descends (all slopes negative), or
  neither.

All objects are immutable after construction and safe to share across
threads.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from motorlab.errors import InputError

BISECTION_XTOL = 1e-10
DETECTION_TOLERANCE = 1e-9


class Regime(str, Enum):
    """How the switching rates enter the system."""

    BOUNDED = "bounded"      # rates used as given
    STRONG = "strong"        # rates carry a 1/sigma factor (two species only)
    VANISHING = "vanishing"  # x-dependent rates that may vanish on large sets


class Normalization(str, Enum):
    UNIT_MASS = "unit_mass"            # trapezoidal integral of the total density is 1
    UNIT_AT_ORIGIN = "unit_at_origin"  # total density at x=0 is 1


def _as_array(x):
    return np.asarray(x, dtype=np.float64)


def smoothstep(u):
    """Cubic blend 3u^2 - 2u^3 clipped to [0,1]; C^1 with flat ends."""
    u = np.clip(_as_array(u), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


# --- potential presets ----------------------------------------------------


class PotentialBase:
    """Shared interface: value/slope/curvature over [0,1], plus metadata.

    smoothness is one of "smooth" (infinitely differentiable),
    "c2_lipschitz" (twice differentiable, Lipschitz second derivative), or
    "c1_lipschitz" (once differentiable, Lipschitz first derivative).
    """

    smoothness = "smooth"
    periodic = False

    def value(self, x):
        raise NotImplementedError

    def slope(self, x):
        raise NotImplementedError

    def curvature(self, x):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class LinearPotential(PotentialBase):
    """psi(x) = gradient * x."""

    gradient: float = 1.0

    def value(self, x):
        return self.gradient * _as_array(x)

    def slope(self, x):
        return np.full_like(_as_array(x), self.gradient)

    def curvature(self, x):
        return np.zeros_like(_as_array(x))

    def describe(self):
        return {"preset": "linear", "gradient": self.gradient}


@dataclass(frozen=True)
class CosineSlopePotential(PotentialBase):
    """Potential whose slope is amplitude * cos(2 pi frequency x).

    negative_lobe_scale rescales the slope wherever the cosine is negative;
    with a scale != 1 the second derivative jumps at the lobe boundaries, so
    the smoothness tag drops to "c1_lipschitz" and the potential is no
    longer 1-periodic (the lobes no longer cancel over a period).
    """

    amplitude: float = 1.0
    frequency: int = 1
    negative_lobe_scale: float = 1.0

    def __post_init__(self):
        if self.frequency < 1 or int(self.frequency) != self.frequency:
            raise InputError("cosine frequency must be a positive integer")

    @property
    def smoothness(self):
        return "smooth" if self.negative_lobe_scale == 1.0 else "c1_lipschitz"

    @property
    def periodic(self):
        return self.negative_lobe_scale == 1.0

    def _bands(self, x):
        # band index k: u in [k pi - pi/2, k pi + pi/2); cos has sign (-1)^k
        u = 2.0 * np.pi * self.frequency * _as_array(x)
        k = np.floor((u + 0.5 * np.pi) / np.pi)
        negative = (k % 2.0) != 0.0
        return u, k, negative

    def slope(self, x):
        u, _, negative = self._bands(x)
        scale = np.where(negative, self.negative_lobe_scale, 1.0)
        return self.amplitude * scale * np.cos(u)

    def curvature(self, x):
        u, _, negative = self._bands(x)
        scale = np.where(negative, self.negative_lobe_scale, 1.0)
        return -2.0 * np.pi * self.frequency * self.amplitude * scale * np.sin(u)

    def value(self, x):
        # accumulate full half-lobes (+2 each positive, -2*scale each negative),
        # then the partial band, all measured from u=0 which sits mid positive lobe
        u, k, negative = self._bands(x)
        lam = self.negative_lobe_scale
        pos_lobes = np.ceil(k / 2.0)
        neg_lobes = np.floor(k / 2.0)
        completed = 2.0 * pos_lobes - 2.0 * lam * neg_lobes
        scale = np.where(negative, lam, 1.0)
        band_start_sin = -np.cos(k * np.pi)  # sin(k pi - pi/2)
        partial = scale * (np.sin(u) - band_start_sin)
        raw = completed + partial
        return self.amplitude / (2.0 * np.pi * self.frequency) * (raw - 1.0)

    def describe(self):
        return {
            "preset": "cosine",
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "negative_lobe_scale": self.negative_lobe_scale,
        }


@dataclass(frozen=True)
class SmoothedSawtoothPotential(PotentialBase):
    """Periodic asymmetric ramp with corners blended to C^{2,1}.

    Each period of length 1/periods rises by `amplitude` over
    rise_fraction of the period and falls back over the rest.  The slope
    is blended across each corner with a cubic smoothstep over
    smoothing_width, which preserves the integral of the slope across the
    blend window (the blend is antisymmetric about the corner), so the
    potential stays exactly 1-periodic.  `shift` translates the pattern;
    the base coordinate is (x - shift) mod period, and the trough corner
    sits at base coordinate 0.
    """

    periods: int = 3
    rise_fraction: float = 0.8
    amplitude: float = 1.0
    smoothing_width: float = 0.01
    shift: float = 0.0

    def __post_init__(self):
        if self.periods < 1:
            raise InputError("sawtooth needs at least one period")
        if not 0.0 < self.rise_fraction < 1.0:
            raise InputError("rise_fraction must lie strictly between 0 and 1")
        period = 1.0 / self.periods
        rise = self.rise_fraction * period
        fall = period - rise
        if not 0.0 < self.smoothing_width < min(rise, fall):
            raise InputError(
                "smoothing_width must be positive and smaller than both ramp lengths"
            )

    smoothness = "c2_lipschitz"
    periodic = True

    @property
    def period(self):
        return 1.0 / self.periods

    @property
    def rise_slope(self):
        return self.amplitude / (self.rise_fraction * self.period)

    @property
    def fall_slope(self):
        return -self.amplitude / ((1.0 - self.rise_fraction) * self.period)

    def _base(self, x):
        return np.mod(_as_array(x) - self.shift, self.period)

    def slope(self, x):
        xi = self._base(x)
        L = self.period
        w = self.smoothing_width
        peak = self.rise_fraction * L
        s_up, s_dn = self.rise_slope, self.fall_slope
        out = np.where(xi < peak, s_up, s_dn)
        # trough blend straddles base 0; its two halves are [L-w/2, L) and [0, w/2)
        right_half = xi < 0.5 * w
        left_half = xi >= L - 0.5 * w
        u_trough = np.where(right_half, (xi + 0.5 * w) / w, (xi - (L - 0.5 * w)) / w)
        in_trough = right_half | left_half
        out = np.where(in_trough, s_dn + (s_up - s_dn) * smoothstep(u_trough), out)
        in_peak = np.abs(xi - peak) <= 0.5 * w
        u_peak = (xi - (peak - 0.5 * w)) / w
        out = np.where(in_peak, s_up + (s_dn - s_up) * smoothstep(u_peak), out)
        return out

    def curvature(self, x):
        xi = self._base(x)
        L = self.period
        w = self.smoothing_width
        peak = self.rise_fraction * L
        s_up, s_dn = self.rise_slope, self.fall_slope
        out = np.zeros_like(xi)
        right_half = xi < 0.5 * w
        left_half = xi >= L - 0.5 * w
        u_trough = np.where(right_half, (xi + 0.5 * w) / w, (xi - (L - 0.5 * w)) / w)
        du = np.clip(u_trough, 0.0, 1.0)
        ds = 6.0 * du * (1.0 - du) / w
        out = np.where(right_half | left_half, (s_up - s_dn) * ds, out)
        in_peak = np.abs(xi - peak) <= 0.5 * w
        u_peak = np.clip((xi - (peak - 0.5 * w)) / w, 0.0, 1.0)
        ds_peak = 6.0 * u_peak * (1.0 - u_peak) / w
        out = np.where(in_peak, (s_dn - s_up) * ds_peak, out)
        return out

    def value(self, x):
        # exact piecewise antiderivative of slope() on one period, anchored
        # at base coordinate 0 (the trough-blend midpoint)
        xi = self._base(x)
        L = self.period
        w = self.smoothing_width
        peak = self.rise_fraction * L
        s_up, s_dn = self.rise_slope, self.fall_slope
        dsl = s_up - s_dn

        def trough_ramp(u):
            # integral of s_dn + dsl * smoothstep from u=1/2, times w
            return w * (s_dn * (u - 0.5) + dsl * (_sstep_int(u) - _sstep_int(0.5)))

        def peak_ramp(u):
            return w * (s_up * u - dsl * _sstep_int(u))

        v_end_trough = trough_ramp(1.0)                    # value at xi = w/2
        v_before_peak = v_end_trough + s_up * (peak - w)   # value at xi = peak - w/2
        v_after_peak = v_before_peak + peak_ramp(1.0)      # value at xi = peak + w/2
        v_before_trough = v_after_peak + s_dn * (L - peak - w)  # at xi = L - w/2

        out = np.empty_like(xi)
        m = xi < 0.5 * w
        out[m] = trough_ramp((xi[m] + 0.5 * w) / w)
        m = (xi >= 0.5 * w) & (xi < peak - 0.5 * w)
        out[m] = v_end_trough + s_up * (xi[m] - 0.5 * w)
        m = (xi >= peak - 0.5 * w) & (xi < peak + 0.5 * w)
        out[m] = v_before_peak + peak_ramp((xi[m] - (peak - 0.5 * w)) / w)
        m = (xi >= peak + 0.5 * w) & (xi < L - 0.5 * w)
        out[m] = v_after_peak + s_dn * (xi[m] - (peak + 0.5 * w))
        m = xi >= L - 0.5 * w
        out[m] = v_before_trough + trough_ramp((xi[m] - (L - 0.5 * w)) / w) - trough_ramp(0.0)
        return out

    def describe(self):
        return {
            "preset": "sawtooth",
            "periods": self.periods,
            "rise_fraction": self.rise_fraction,
            "amplitude": self.amplitude,
            "smoothing_width": self.smoothing_width,
            "shift": self.shift,
        }


def _sstep_int(u):
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    return u ** 3 - 0.5 * u ** 4


@dataclass(frozen=True)
class ShiftedCopyPotential(PotentialBase):
    """Another species' potential translated by `shift` (wrapping at 1).

    Only valid for 1-periodic sources; wrapping a non-periodic potential
    would introduce a jump.
    """

    source: PotentialBase
    shift: float

    def __post_init__(self):
        if not self.source.periodic:
            raise InputError("shifted_copy requires a 1-periodic source potential")

    @property
    def smoothness(self):
        return self.source.smoothness

    periodic = True

    def _arg(self, x):
        return np.mod(_as_array(x) - self.shift, 1.0)

    def value(self, x):
        return self.source.value(self._arg(x))

    def slope(self, x):
        return self.source.slope(self._arg(x))

    def curvature(self, x):
        return self.source.curvature(self._arg(x))

    def describe(self):
        return {"preset": "shifted_copy", "shift": self.shift,
                "source": self.source.describe()}


@dataclass(frozen=True)
class TiltedPotential(PotentialBase):
    """A source potential plus a linear drift.

    Tilting breaks periodicity but preserves smoothness; it is the
    standard way to keep the slope maximum strictly positive when two
    otherwise antiphase landscapes would share a descent.
    """

    source: PotentialBase
    drift: float

    @property
    def smoothness(self):
        return self.source.smoothness

    periodic = False

    def value(self, x):
        x = _as_array(x)
        return self.source.value(x) + self.drift * x

    def slope(self, x):
        return self.source.slope(x) + self.drift

    def curvature(self, x):
        return self.source.curvature(x)

    def describe(self):
        return {"preset": "tilted", "drift": self.drift,
                "source": self.source.describe()}


class SampledPotential(PotentialBase):
    """Piecewise-cubic interpolant of user samples (not-a-knot spline)."""

    smoothness = "c2_lipschitz"
    periodic = False

    def __init__(self, xs, values):
        from scipy.interpolate import CubicSpline

        xs = _as_array(xs)
        values = _as_array(values)
        if xs.ndim != 1 or xs.size < 4:
            raise InputError("sampled potential needs at least four nodes")
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0.0):
            raise InputError("sample nodes must increase strictly from 0 to 1")
        if values.shape != xs.shape:
            raise InputError("sample values must match the node count")
        self._xs = xs
        self._values = values
        self._spline = CubicSpline(xs, values, bc_type="not-a-knot")
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    def value(self, x):
        return self._spline(_as_array(x))

    def slope(self, x):
        return self._d1(_as_array(x))

    def curvature(self, x):
        return self._d2(_as_array(x))

    def describe(self):
        return {"preset": "samples", "x": self._xs.tolist(),
                "psi": self._values.tolist()}


# --- potential sets -------------------------------------------------------


@dataclass(frozen=True)
class PotentialSet:
    """The I species potentials, stacked evaluation helpers included."""

    species: tuple

    def __post_init__(self):
        if len(self.species) < 1:
            raise InputError("at least one species potential is required")

    @property
    def species_count(self):
        return len(self.species)

    def values_at(self, x):
        x = _as_array(x)
        return np.stack([p.value(x) for p in self.species])

    def slopes_at(self, x):
        x = _as_array(x)
        return np.stack([p.slope(x) for p in self.species])

    def curvatures_at(self, x):
        x = _as_array(x)
        return np.stack([p.curvature(x) for p in self.species])

    def min_slope(self, x):
        return self.slopes_at(x).min(axis=0)

    def max_slope(self, x):
        return self.slopes_at(x).max(axis=0)

    def slope_lipschitz(self, samples=4097):
        """Estimated Lipschitz constant of the slopes (max |curvature|)."""
        x = np.linspace(0.0, 1.0, samples)
        return float(np.abs(self.curvatures_at(x)).max())

    def describe(self):
        return [p.describe() for p in self.species]


def eval_potential(pot, i, x, order=0):
    """Evaluate species i's potential (order 0), slope (1), or curvature (2)."""
    if not 0 <= i < pot.species_count:
        raise InputError(f"species index {i} outside 0..{pot.species_count - 1}")
    if order not in (0, 1, 2):
        raise InputError(f"derivative order must be 0, 1, or 2, got {order!r}")
    arr = _as_array(x)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InputError("evaluation points must lie in [0, 1]")
    p = pot.species[i]
    res = (p.value, p.slope, p.curvature)[order](arr)
    if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
        return float(res)
    return res


# --- switching rates ------------------------------------------------------


@dataclass(frozen=True)
class ConstantRate:
    value: float

    def __call__(self, x):
        return np.full_like(_as_array(x), self.value)

    def describe(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class SmoothBumpRate:
    """C^1 bump: smoothstep ramps up/down around a flat plateau.

    Supported on [center - width/2, center + width/2]; the plateau occupies
    plateau_fraction of the support, the two ramps share the rest.
    """

    center: float
    width: float
    height: float
    plateau_fraction: float = 0.5

    def __post_init__(self):
        if self.width <= 0.0 or self.height < 0.0:
            raise InputError("bump width must be positive and height nonnegative")
        if not 0.0 <= self.plateau_fraction < 1.0:
            raise InputError("plateau_fraction must lie in [0, 1)")

    def __call__(self, x):
        x = _as_array(x)
        a = self.center - 0.5 * self.width
        b = self.center + 0.5 * self.width
        ramp = 0.5 * self.width * (1.0 - self.plateau_fraction)
        up = smoothstep((x - a) / ramp)
        down = smoothstep((b - x) / ramp)
        return self.height * up * down

    def describe(self):
        return {"kind": "bump", "center": self.center, "width": self.width,
                "height": self.height, "plateau_fraction": self.plateau_fraction}


@dataclass(frozen=True)
class TransitionRates:
    """Nonnegative switching rates nu[i][j] (the j -> i channel).

    The diagonal entry of column j is tied to that column's off-diagonal
    sum (everything leaving species j), which is what makes the transpose
    of the assembled operator annihilate the all-ones vector.  Entries on
    the diagonal may be given explicitly (validate_rates then checks them)
    or left as None to be derived.
    """

    species_count: int
    entries: tuple          # I x I tuple-of-tuples; entries[i][j] callable or None
    regime: Regime = Regime.BOUNDED
    lower_bound_k: float = None

    def __post_init__(self):
        I = self.species_count
        if len(self.entries) != I or any(len(row) != I for row in self.entries):
            raise InputError("rate entries must form a square species matrix")
        for i in range(I):
            for j in range(I):
                if i != j and self.entries[i][j] is None:
                    raise InputError("off-diagonal rate entries must be provided")
        if self.lower_bound_k is None:
            object.__setattr__(self, "lower_bound_k", self._default_lower_bound())

    @classmethod
    def constant(cls, matrix, regime=Regime.BOUNDED, lower_bound_k=None,
                 explicit_diagonal=False):
        """Build from an I x I array of constants; diagonal derived unless
        explicit_diagonal is set."""
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError("rate matrix must be square")
        I = arr.shape[0]
        rows = []
        for i in range(I):
            row = []
            for j in range(I):
                if i == j and not explicit_diagonal:
                    row.append(None)
                else:
                    row.append(ConstantRate(float(arr[i, j])))
            rows.append(tuple(row))
        return cls(I, tuple(rows), regime=regime, lower_bound_k=lower_bound_k)

    def _default_lower_bound(self):
        if self.regime is Regime.VANISHING or self.species_count == 1:
            return 0.0
        x = np.linspace(0.0, 1.0, 513)
        lo = np.inf
        for i in range(self.species_count):
            for j in range(self.species_count):
                if i != j:
                    lo = min(lo, float(np.min(self.entries[i][j](x))))
        return max(lo, 0.0)

    def offdiag_at(self, i, j, x):
        if i == j:
            raise InputError("offdiag_at needs i != j")
        return self.entries[i][j](x)

    def matrix_at(self, x):
        """Full rate matrix sampled at x: shape (I, I, len(x)).

        Diagonal columns are derived from the off-diagonal column sums
        unless explicit diagonal entries were supplied.
        """
        x = _as_array(x)
        I = self.species_count
        out = np.zeros((I, I, x.size))
        for i in range(I):
            for j in range(I):
                if i != j:
                    out[i, j] = self.entries[i][j](x)
        for j in range(I):
            if self.entries[j][j] is not None:
                out[j, j] = self.entries[j][j](x)
            else:
                out[j, j] = out[:, j, :].sum(axis=0) - out[j, j]
        return out

    def effective_matrix_at(self, x, sigma):
        """Rates as they enter the system at diffusion sigma (1/sigma
        scaling in the strong regime)."""
        m = self.matrix_at(x)
        if self.regime is Regime.STRONG:
            return m / sigma
        return m

    def describe(self):
        I = self.species_count
        return {
            "species_count": I,
            "regime": self.regime.value,
            "lower_bound_k": self.lower_bound_k,
            "entries": [
                [None if self.entries[i][j] is None else self.entries[i][j].describe()
                 for j in range(I)]
                for i in range(I)
            ],
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def valid(self):
        return len(self.violations) == 0


def validate_rates(rates, samples=257):
    """Report every violated rate condition; never raises.

    Checks, at sampled points: finiteness and nonnegativity of all entries,
    the column rule tying each diagonal entry to its off-diagonal column
    sum (derived diagonals satisfy it by construction), and per-regime
    positivity of the off-diagonal entries.
    """
    x = np.linspace(0.0, 1.0, samples)
    I = rates.species_count
    violations = []
    m = rates.matrix_at(x)

    if not np.all(np.isfinite(m)):
        bad = np.argwhere(~np.isfinite(m))
        i, j, s = bad[0]
        violations.append({
            "condition": "finite_entries",
            "indices": (int(i), int(j)),
            "x": float(x[s]),
            "detail": "rate evaluates to a non-finite value",
        })
    neg = m < 0.0
    if np.any(neg):
        bad = np.argwhere(neg)
        i, j, s = bad[0]
        violations.append({
            "condition": "nonnegative_entries",
            "indices": (int(i), int(j)),
            "x": float(x[s]),
            "detail": f"rate is negative ({m[i, j, s]:.3g})",
        })

    col_sums = m.sum(axis=0) - 2.0 * np.einsum("jjm->jm", m)
    # col_sums[j] = sum_{i != j} nu_ij - nu_jj; zero when the diagonal is consistent
    scale = np.maximum(np.abs(m).max(axis=(0, 1)), 1.0)
    bad_cols = np.abs(col_sums) > 1e-12 * scale
    for j in range(I):
        if np.any(bad_cols[j]):
            s = int(np.argmax(np.abs(col_sums[j])))
            diag = m[j, j, s]
            off = diag + col_sums[j, s]
            violations.append({
                "condition": "diagonal_column_sum",
                "indices": (int(j), int(j)),
                "x": float(x[s]),
                "detail": f"diagonal {diag:.6g} != off-diagonal column sum {off:.6g}",
            })

    if rates.regime in (Regime.BOUNDED, Regime.STRONG):
        for i in range(I):
            for j in range(I):
                if i == j:
                    continue
                lo = float(np.min(m[i, j]))
                if lo < rates.lower_bound_k or lo <= 0.0:
                    s = int(np.argmin(m[i, j]))
                    violations.append({
                        "condition": "offdiagonal_lower_bound",
                        "indices": (i, j),
                        "x": float(x[s]),
                        "detail": f"rate minimum {lo:.3g} below bound {rates.lower_bound_k:.3g}",
                    })
        if rates.regime is Regime.STRONG and I != 2:
            violations.append({
                "condition": "strong_regime_species_count",
                "indices": (I, I),
                "x": 0.0,
                "detail": "the strong regime supports exactly two species",
            })

    return ValidationReport(tuple(violations))


# --- region decomposition -------------------------------------------------


@dataclass(frozen=True)
class RegionDecomposition:
    """Sign regions of the slope envelope.

    j_intervals: every species ascends (min slope > tol);
    k_intervals: every species descends (max slope < -tol);
    neutral_intervals / neutral_points: the remainder.
    """

    j_intervals: tuple
    k_intervals: tuple
    neutral_intervals: tuple
    neutral_points: tuple
    detection_tolerance: float

    def label_nodes(self, x):
        """Classify grid nodes: 'j', 'k', or 'n' per node."""
        x = _as_array(x)
        out = np.full(x.shape, "n", dtype="<U1")
        for a, b in self.j_intervals:
            out[(x >= a) & (x <= b)] = "j"
        for a, b in self.k_intervals:
            out[(x >= a) & (x <= b)] = "k"
        return out

    def describe(self):
        return {
            "j_intervals": [list(iv) for iv in self.j_intervals],
            "k_intervals": [list(iv) for iv in self.k_intervals],
            "neutral_intervals": [list(iv) for iv in self.neutral_intervals],
            "neutral_points": list(self.neutral_points),
            "detection_tolerance": self.detection_tolerance,
        }


def _bisect_crossing(f, lo, hi):
    """Locate the sign change of f between lo and hi to BISECTION_XTOL."""
    flo = f(lo)
    for _ in range(200):
        if hi - lo <= BISECTION_XTOL:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign_intervals(f, samples, tol):
    """Maximal intervals of {f > tol} in [0,1], edges refined by bisection."""
    x = np.linspace(0.0, 1.0, samples)
    inside = f(x) > tol
    intervals = []
    g = lambda t: f(np.asarray([t]))[0] - tol
    m = 0
    while m < samples:
        if not inside[m]:
            m += 1
            continue
        start = m
        while m + 1 < samples and inside[m + 1]:
            m += 1
        left = x[start] if start == 0 else _bisect_crossing(g, x[start - 1], x[start])
        right = x[m] if m == samples - 1 else _bisect_crossing(g, x[m], x[m + 1])
        if right > left:
            intervals.append((float(left), float(right)))
        m += 1
    return intervals


POINT_WIDTH = 1e-6  # neutral components thinner than this count as points


def decompose_regions(pot, samples=4097, detection_tolerance=DETECTION_TOLERANCE):
    """Split [0,1] by the sign of the slope envelope.

    Interval edges are located by bisecting the envelope against the
    detection tolerance, so zero crossings of slope envelopes are resolved
    to far better than the sampling resolution.
    """
    if samples < 2:
        raise InputError("region decomposition needs at least two samples")
    tol = detection_tolerance
    j_iv = _sign_intervals(pot.min_slope, samples, tol)
    k_iv = _sign_intervals(lambda x: -pot.max_slope(x), samples, tol)

    marks = sorted([(a, b, "j") for a, b in j_iv] + [(a, b, "k") for a, b in k_iv])
    neutral_intervals, neutral_points = [], []
    cursor = 0.0
    for a, b, _ in marks + [(1.0, 1.0, "end")]:
        if a > cursor:
            width = a - cursor
            if width <= POINT_WIDTH:
                neutral_points.append(float(0.5 * (cursor + a)))
            else:
                neutral_intervals.append((float(cursor), float(a)))
        cursor = max(cursor, b)
    return RegionDecomposition(
        j_intervals=tuple(j_iv),
        k_intervals=tuple(k_iv),
        neutral_intervals=tuple(neutral_intervals),
        neutral_points=tuple(neutral_points),
        detection_tolerance=tol,
    )


def negative_slope_intervals(pot, i, samples=4097,
                             detection_tolerance=DETECTION_TOLERANCE):
    """Maximal intervals where species i's slope is negative."""
    f = lambda x: -pot.species[i].slope(_as_array(x))
    return tuple(_sign_intervals(f, samples, detection_tolerance))


# --- assumption certification ----------------------------------------------


@dataclass(frozen=True)
class AssumptionReport:
    """Which standing assumptions hold, and which limit constructions they
    enable.

    flags keys:
      smooth_potentials          second derivatives exist and are Lipschitz
      rates_bounded_below        off-diagonal rates >= lower_bound_k > 0
      ascent_regions_exist       at least one interval where all slopes > 0
      max_slope_positive         the slope maximum is positive on all of [0,1]
      finite_region_structure    the sign decomposition is a finite union
      descent_handoff            each species' descent ends with an active
                                 outgoing rate toward a non-descending species
    """

    flags: dict
    details: dict
    applicable: dict

    def require(self, construction):
        if not self.applicable.get(construction, False):
            raise InputError(
                f"limit construction '{construction}' not certified: "
                f"{self.details.get(construction, 'assumptions unmet')}"
            )


def check_assumptions(config, regions, samples=2049):
    """Numerically certify the standing assumptions for a configuration."""
    pot = config.potentials
    rates = config.rates
    I = pot.species_count
    x = np.linspace(0.0, 1.0, samples)
    flags, details = {}, {}

    smooth_ok = all(p.smoothness in ("smooth", "c2_lipschitz") for p in pot.species)
    flags["smooth_potentials"] = smooth_ok
    details["smooth_potentials"] = [p.smoothness for p in pot.species]

    if I == 1:
        # no off-diagonal channels exist, so the lower bound holds vacuously
        rates_ok = True
        details["rates_bounded_below"] = {"species_count": 1}
    elif rates.regime in (Regime.BOUNDED, Regime.STRONG):
        m = rates.matrix_at(x)
        off_min = np.inf
        for i in range(I):
            for j in range(I):
                if i != j:
                    off_min = min(off_min, float(np.min(m[i, j])))
        rates_ok = off_min >= rates.lower_bound_k > 0.0
        details["rates_bounded_below"] = {"min_offdiagonal": off_min,
                                          "lower_bound_k": rates.lower_bound_k}
    else:
        rates_ok = False
        details["rates_bounded_below"] = {"regime": rates.regime.value,
                                          "species_count": I}
    flags["rates_bounded_below"] = rates_ok

    flags["ascent_regions_exist"] = len(regions.j_intervals) > 0
    details["ascent_regions_exist"] = {"count": len(regions.j_intervals)}

    max_slope_min = float(pot.max_slope(x).min())
    flags["max_slope_positive"] = max_slope_min > regions.detection_tolerance
    details["max_slope_positive"] = {"min_over_domain": max_slope_min}

    flags["finite_region_structure"] = True
    details["finite_region_structure"] = {
        "j_count": len(regions.j_intervals),
        "k_count": len(regions.k_intervals),
        "neutral_intervals": len(regions.neutral_intervals),
        "neutral_points": len(regions.neutral_points),
    }

    handoff_ok = True
    handoff_detail = []
    for j in range(I):
        for a, b in negative_slope_intervals(pot, j,
                                             detection_tolerance=regions.detection_tolerance):
            found = None
            for i in range(I):
                if i == j:
                    continue
                xs = np.linspace(a, b, 257)
                if np.min(pot.species[i].slope(xs)) < -regions.detection_tolerance:
                    continue
                probe = np.linspace(max(a, b - 0.25 * (b - a)), b, 65)
                if np.min(rates.offdiag_at(i, j, probe)) > 0.0:
                    found = i
                    break
            handoff_detail.append({"species": j, "interval": [a, b],
                                   "partner": found})
            if found is None:
                handoff_ok = False
    flags["descent_handoff"] = handoff_ok
    details["descent_handoff"] = handoff_detail

    applicable = {
        "bounded": (smooth_ok and rates_ok and flags["ascent_regions_exist"]
                    and flags["max_slope_positive"]),
        "piecewise": (smooth_ok and rates_ok and flags["ascent_regions_exist"]
                      and flags["finite_region_structure"]),
        "strong": (rates.regime is Regime.STRONG and I == 2 and smooth_ok
                   and rates_ok and flags["ascent_regions_exist"]
                   and flags["max_slope_positive"]),
        "vanishing": (rates.regime is Regime.VANISHING and smooth_ok
                      and flags["ascent_regions_exist"]
                      and flags["max_slope_positive"] and handoff_ok),
    }
    for name, ok in applicable.items():
        if not ok:
            failing = [k for k, v in flags.items() if not v]
            details[name] = f"unmet assumptions: {failing}"
    return AssumptionReport(flags=flags, details=details, applicable=applicable)


# --- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    potentials: PotentialSet
    rates: TransitionRates
    normalization: Normalization = Normalization.UNIT_AT_ORIGIN
    title: str = ""

    def __post_init__(self):
        if self.potentials.species_count != self.rates.species_count:
            raise InputError(
                "potential and rate species counts disagree "
                f"({self.potentials.species_count} vs {self.rates.species_count})"
            )

    @property
    def species_count(self):
        return self.potentials.species_count

    def describe(self):
        return {
            "title": self.title,
            "normalization": self.normalization.value,
            "potentials": self.potentials.describe(),
            "rates": self.rates.describe(),
        }
