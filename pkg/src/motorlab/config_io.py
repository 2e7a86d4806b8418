"""YAML configurations: fail-closed loader and deterministic dumper.

The file schema mirrors the describe() dictionaries of the model types,
with 1-based species indices and explicit channel direction (`from`/`to`)
for rates.  Unknown keys are errors everywhere — a typo in an
assumption-critical field (regime, lower_bound_k, rate support) must not
pass silently.  All quantities are nondimensional: positions are
fractions of the track, potentials are in units of the thermal energy,
and rates are per unit time; the required ``units: nondimensional`` field
records that convention in the file itself.
"""

import yaml

from motorlab.errors import InputError
from motorlab.model import (
    ConstantRate,
    CosineSlopePotential,
    LinearPotential,
    ModelConfig,
    Normalization,
    PotentialSet,
    Regime,
    SampledPotential,
    ShiftedCopyPotential,
    SmoothBumpRate,
    SmoothedSawtoothPotential,
    TiltedPotential,
    TransitionRates,
)

SCHEMA_VERSION = 1
UNITS = "nondimensional"

_CONFIG_KEYS = {"schema_version", "units", "title", "normalization",
                "regime", "lower_bound_k", "species", "rates"}
_POTENTIAL_FIELDS = {
    "linear": {"gradient"},
    "cosine": {"amplitude", "frequency", "negative_lobe_scale"},
    "sawtooth": {"periods", "rise_fraction", "amplitude",
                 "smoothing_width", "shift"},
    "shifted_copy": {"shift", "source"},
    "tilted": {"drift", "source"},
    "samples": {"x", "psi"},
}
_RATE_FIELDS = {
    "constant": {"value"},
    "bump": {"center", "width", "height", "plateau_fraction"},
}


def _require_mapping(node, where):
    if not isinstance(node, dict):
        raise InputError(f"{where} must be a mapping, got {type(node).__name__}")


def _check_keys(node, allowed, where):
    unknown = sorted(set(node) - allowed)
    if unknown:
        raise InputError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _build_potential(node, where, earlier):
    _require_mapping(node, where)
    preset = node.get("preset")
    if preset not in _POTENTIAL_FIELDS:
        known = ", ".join(sorted(_POTENTIAL_FIELDS))
        raise InputError(f"{where}: preset must be one of {known}, "
                         f"got {preset!r}")
    _check_keys(node, _POTENTIAL_FIELDS[preset] | {"preset"}, where)
    kwargs = {k: v for k, v in node.items() if k not in ("preset", "source")}
    if preset in ("shifted_copy", "tilted"):
        src = node.get("source")
        if src is None:
            raise InputError(f"{where}: preset {preset} needs a source")
        if isinstance(src, dict) and set(src) == {"species"}:
            k = src["species"]
            if not isinstance(k, int) or not 1 <= k <= len(earlier):
                raise InputError(
                    f"{where}: source species reference must name an "
                    f"earlier species (1..{len(earlier)}), got {k!r}")
            source = earlier[k - 1]
        else:
            source = _build_potential(src, f"{where}.source", earlier)
        kwargs["source"] = source
    cls = {
        "linear": LinearPotential,
        "cosine": CosineSlopePotential,
        "sawtooth": SmoothedSawtoothPotential,
        "shifted_copy": ShiftedCopyPotential,
        "tilted": TiltedPotential,
        "samples": SampledPotential,
    }[preset]
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InputError(f"{where}: {exc}") from exc


def _build_rate(node, where):
    _require_mapping(node, where)
    kind = node.get("kind")
    if kind not in _RATE_FIELDS:
        raise InputError(f"{where}: kind must be one of "
                         f"{', '.join(sorted(_RATE_FIELDS))}, got {kind!r}")
    _check_keys(node, _RATE_FIELDS[kind] | {"kind", "from", "to"}, where)
    kwargs = {k: v for k, v in node.items()
              if k not in ("kind", "from", "to")}
    cls = {"constant": ConstantRate, "bump": SmoothBumpRate}[kind]
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InputError(f"{where}: {exc}") from exc


def config_from_dict(data):
    _require_mapping(data, "configuration")
    _check_keys(data, _CONFIG_KEYS, "configuration")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"schema_version must be {SCHEMA_VERSION}, "
                         f"got {version!r}")
    if data.get("units") != UNITS:
        raise InputError(f"units must be {UNITS!r} (that is the only "
                         "convention this schema defines), "
                         f"got {data.get('units')!r}")

    norm_key = data.get("normalization", Normalization.UNIT_AT_ORIGIN.value)
    try:
        normalization = Normalization(norm_key)
    except ValueError:
        raise InputError(
            f"normalization must be one of "
            f"{', '.join(n.value for n in Normalization)}, got {norm_key!r}")
    regime_key = data.get("regime", Regime.BOUNDED.value)
    try:
        regime = Regime(regime_key)
    except ValueError:
        raise InputError(f"regime must be one of "
                         f"{', '.join(r.value for r in Regime)}, "
                         f"got {regime_key!r}")

    species = data.get("species")
    if not isinstance(species, list) or not species:
        raise InputError("species must be a non-empty list")
    potentials = []
    for k, entry in enumerate(species, start=1):
        where = f"species[{k}]"
        _require_mapping(entry, where)
        _check_keys(entry, {"potential"}, where)
        if "potential" not in entry:
            raise InputError(f"{where}: missing potential")
        potentials.append(_build_potential(entry["potential"],
                                           f"{where}.potential", potentials))
    I = len(potentials)

    rate_items = data.get("rates", [])
    if not isinstance(rate_items, list):
        raise InputError("rates must be a list of channel mappings")
    entries = [[None] * I for _ in range(I)]
    for k, item in enumerate(rate_items, start=1):
        where = f"rates[{k}]"
        _require_mapping(item, where)
        src, dst = item.get("from"), item.get("to")
        for name, v in (("from", src), ("to", dst)):
            if not isinstance(v, int) or not 1 <= v <= I:
                raise InputError(f"{where}: {name} must be a species index "
                                 f"in 1..{I}, got {v!r}")
        if src == dst:
            raise InputError(f"{where}: diagonal entries are derived from "
                             "column sums, do not list them")
        if entries[dst - 1][src - 1] is not None:
            raise InputError(f"{where}: duplicate channel {src} -> {dst}")
        entries[dst - 1][src - 1] = _build_rate(item, where)
    missing = [f"{j + 1} -> {i + 1}"
               for i in range(I) for j in range(I)
               if i != j and entries[i][j] is None]
    if missing:
        raise InputError("missing rate channel(s): " + ", ".join(missing))

    lower = data.get("lower_bound_k")
    if lower is not None and (not isinstance(lower, (int, float))
                              or isinstance(lower, bool) or lower < 0):
        raise InputError(f"lower_bound_k must be a nonnegative number, "
                         f"got {lower!r}")
    rates = TransitionRates(I, tuple(tuple(row) for row in entries),
                            regime=regime, lower_bound_k=lower)
    title = data.get("title", "")
    if not isinstance(title, str):
        raise InputError(f"title must be a string, got {title!r}")
    return ModelConfig(PotentialSet(tuple(potentials)), rates,
                       normalization, title=title)


def load_config(path):
    """Read and validate a configuration file; InputError on bad content."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"could not parse {path}: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(config):
    """Inverse of config_from_dict for save/round-trip purposes."""
    rates = config.rates
    I = config.species_count
    items = []
    for i in range(I):
        for j in range(I):
            if i != j and rates.entries[i][j] is not None:
                d = rates.entries[i][j].describe()
                items.append({"from": j + 1, "to": i + 1, **d})
    return {
        "schema_version": SCHEMA_VERSION,
        "units": UNITS,
        "title": config.title,
        "normalization": config.normalization.value,
        "regime": rates.regime.value,
        "lower_bound_k": rates.lower_bound_k,
        "species": [{"potential": p.describe()}
                    for p in config.potentials.species],
        "rates": items,
    }


def dump_config(config):
    return yaml.safe_dump(config_to_dict(config), sort_keys=False,
                          default_flow_style=False)


def save_config(config, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_config(config))
