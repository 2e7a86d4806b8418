"""Deterministic CSV/JSON writers shared by the command-line tools.

Every writer here is a pure function of its inputs: floats are printed
with 17 significant digits (enough for a bit-faithful round trip), JSON
keys are sorted, and nothing reads the clock.  File names carry a short
content hash of the configuration plus the diffusion range, so outputs
from different runs can share a directory without colliding.
"""

import hashlib
import json

import numpy as np

FLOAT_FORMAT = "%.17g"
HASH_LENGTH = 12


def format_float(value):
    return FLOAT_FORMAT % float(value)


def _plain(obj):
    """Recursively convert numpy scalars/arrays so json can emit them."""
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def json_text(payload):
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n"


def csv_text(labels, columns):
    """CSV with a header row; every column is a same-length 1-D array."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(labels):
        raise ValueError(f"{len(labels)} labels for {len(cols)} columns")
    n = cols[0].shape[0]
    if any(c.ndim != 1 or c.shape[0] != n for c in cols):
        raise ValueError("columns must be 1-D and equally long")
    lines = [",".join(labels)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def density_csv(density):
    labels = ["x"] + [f"n_{i + 1}" for i in range(density.species_count)]
    return csv_text(labels, [density.grid.nodes, *density.values])


def phase_csv(phase):
    labels = (["x"] + [f"r_{i + 1}" for i in range(phase.species_count)]
              + ["s"])
    return csv_text(labels, [phase.grid.nodes, *phase.r_values,
                             phase.s_values])


def profile_csv(profile):
    # same x-first schema as the phase writer, for side-by-side plots
    return csv_text(["x", "r", "dr_dx"],
                    [profile.grid.nodes, profile.r_values,
                     profile.slope_values])


def constraint_csv(bounds, grid):
    """Per-species slope corridors (vanishing regime has no profile)."""
    labels, cols = ["x"], [grid.nodes]
    for c in bounds.constraints:
        labels += [f"lower_{c.species + 1}", f"upper_{c.species + 1}"]
        cols += [c.lower, c.upper]
    labels.append("ascent_target")
    cols.append(bounds.j_equality_target)
    return csv_text(labels, cols)


def convergence_csv(table):
    if not table.rows:
        return "sigma\n"
    I = len(table.rows[0].errors)
    npairs = len(table.rows[0].gap_integrals)
    labels = (["sigma"] + [f"err_{i + 1}" for i in range(I)]
              + [f"gap_{k + 1}" for k in range(npairs)] + ["far_mass"])
    columns = [np.array([row.sigma for row in table.rows])]
    for i in range(I):
        columns.append(np.array([row.errors[i] for row in table.rows]))
    for k in range(npairs):
        columns.append(np.array([row.gap_integrals[k] for row in table.rows]))
    columns.append(np.array([row.far_mass for row in table.rows]))
    return csv_text(labels, columns)


def config_hash(config):
    """Short content hash of a configuration's canonical description."""
    canon = json.dumps(_plain(config.describe()), sort_keys=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:HASH_LENGTH]


def sigma_tag(sigmas):
    vals = [float(s) for s in sigmas]
    if not vals:
        raise ValueError("sigma_tag needs at least one value")
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return f"sig{lo:g}"
    return f"sig{hi:g}-{lo:g}"


def run_tag(config, sigmas):
    return f"{config_hash(config)}__{sigma_tag(sigmas)}"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
