"""Assembly kernels: Bernoulli weights, residual/Jacobian parity, saturation."""

import os
import subprocess
import sys

import numpy as np
import pytest

from motorlab import kernels
from motorlab._kernels_py import (
    EXP_CAP,
    VALUE_CAP,
    bernoulli as bernoulli_py,
    phase_jacobian_bands as jacobian_py,
    phase_residual as residual_py,
)

HAVE_COMPILED = "compiled" in kernels.available_backends()

if HAVE_COMPILED:
    from motorlab import _kernels as _compiled


def _random_case(rng, species, nodes, scale=1.0):
    r = np.cumsum(rng.normal(0.0, scale, size=(species, nodes)), axis=1)
    bp = rng.uniform(0.3, 2.0, size=(species, nodes - 1))
    bm = rng.uniform(0.3, 2.0, size=(species, nodes - 1))
    off = rng.uniform(0.05, 1.5, size=(species, species, nodes))
    nu = off.copy()
    for j in range(species):
        nu[j, j] = off[:, j].sum(axis=0) - off[j, j]
    return r, bp, bm, nu


# --- bernoulli ----------------------------------------------------------------


def test_bernoulli_reference_values():
    t = np.array([0.5, 3.0, -3.0, 30.0, -30.0])
    exact = t / np.expm1(t)
    assert np.abs(bernoulli_py(t) / exact - 1.0).max() < 1e-14


def test_bernoulli_small_argument_branch():
    # series 1 - t/2 + t^2/12 near zero, where t/expm1(t) loses digits
    t = np.array([0.0, 1e-12, -1e-12, 1e-7, -1e-7, 1e-4, -1e-4])
    series = 1.0 - t / 2.0 + t * t / 12.0
    assert np.abs(bernoulli_py(t) - series).max() < 1e-15
    assert bernoulli_py(np.array([0.0]))[0] == 1.0


def test_bernoulli_large_arguments_stay_finite():
    t = np.array([700.0, 800.0, 5000.0])
    up = bernoulli_py(t)
    down = bernoulli_py(-t)
    assert np.all(np.isfinite(up)) and np.all(up >= 0.0)
    # B(-t) = B(t) + t, and the decaying side is negligible out here
    assert np.abs(down / t - 1.0).max() < 1e-12


def test_bernoulli_reflection_identity():
    rng = np.random.default_rng(11)
    t = rng.normal(0.0, 20.0, size=4096)
    lhs = bernoulli_py(-t)
    rhs = bernoulli_py(t) + t
    scale = np.maximum(np.abs(rhs), 1.0)
    assert (np.abs(lhs - rhs) / scale).max() < 1e-13


# --- residual and jacobian ------------------------------------------------------


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(23)
    species, nodes = 2, 9
    sigma, h = 0.5, 1.0 / (nodes - 1)
    r, bp, bm, nu = _random_case(rng, species, nodes, scale=0.2)

    ab = jacobian_py(r, bp, bm, nu, sigma, h)
    size = species * nodes
    dense = np.zeros((size, size))
    for col in range(size):
        lo = max(0, col - species)
        hi = min(size, col + species + 1)
        for row in range(lo, hi):
            dense[row, col] = ab[species + row - col, col]

    step = 1e-6
    fd = np.zeros((size, size))
    for col in range(size):
        m, i = divmod(col, species)
        rp = r.copy(); rp[i, m] += step
        rm = r.copy(); rm[i, m] -= step
        fp, _ = residual_py(rp, bp, bm, nu, sigma, h)
        fm, _ = residual_py(rm, bp, bm, nu, sigma, h)
        fd[:, col] = (fp - fm).T.ravel() / (2.0 * step)

    scale = np.abs(dense).max()
    assert np.abs(dense - fd).max() < 1e-6 * scale


def test_jacobian_band_envelope_is_respected():
    rng = np.random.default_rng(5)
    species, nodes = 3, 7
    r, bp, bm, nu = _random_case(rng, species, nodes)
    ab = jacobian_py(r, bp, bm, nu, 0.3, 1.0 / (nodes - 1))
    assert ab.shape == (2 * species + 1, species * nodes)
    size = species * nodes
    # entries addressed outside the matrix must stay zero padding
    for col in range(size):
        for band in range(2 * species + 1):
            row = band - species + col
            if row < 0 or row >= size:
                assert ab[band, col] == 0.0


def test_residual_saturation_is_finite_and_counted():
    rng = np.random.default_rng(31)
    r, bp, bm, nu = _random_case(rng, 2, 33, scale=2000.0)
    sigma, h = 0.01, 1.0 / 32.0
    with np.errstate(over="raise"):
        res, clamped = residual_py(r, bp, bm, nu, sigma, h)
        ab = jacobian_py(r, bp, bm, nu, sigma, h)
    assert clamped > 0
    assert np.all(np.isfinite(res)) and np.abs(res).max() <= VALUE_CAP
    assert np.all(np.isfinite(ab)) and np.abs(ab).max() <= VALUE_CAP


def test_saturation_plateau_freezes_the_residual():
    # far past the exponent cap the continuation is flat, so widening an
    # already-saturated jump cannot change the assembled residual
    bp = np.ones((1, 1)); bm = np.ones((1, 1))
    nu = np.zeros((1, 1, 2))
    out = []
    for spread in (900.0, 1800.0):
        r = np.array([[0.0, -spread * 0.01]])
        res, clamped = residual_py(r, bp, bm, nu, 0.01, 0.5)
        assert clamped > 0
        out.append(res)
    assert np.array_equal(out[0], out[1])


# --- backend parity --------------------------------------------------------------


@pytest.mark.skipif(not HAVE_COMPILED, reason="extension module not built")
def test_compiled_bernoulli_matches_python():
    rng = np.random.default_rng(43)
    t = rng.normal(0.0, 50.0, size=8192)
    a = _compiled.bernoulli(t)
    b = bernoulli_py(t)
    scale = np.maximum(np.abs(b), 1.0)
    assert (np.abs(a - b) / scale).max() < 1e-13


@pytest.mark.skipif(not HAVE_COMPILED, reason="extension module not built")
@pytest.mark.parametrize("scale", [0.3, 2000.0])
def test_compiled_kernels_match_python(scale):
    rng = np.random.default_rng(int(scale))
    r, bp, bm, nu = _random_case(rng, 3, 41, scale=scale)
    sigma, h = 0.02, 1.0 / 40.0

    res_c, clamp_c = _compiled.phase_residual(r, bp, bm, nu, sigma, h)
    res_p, clamp_p = residual_py(r, bp, bm, nu, sigma, h)
    assert clamp_c == clamp_p
    rscale = np.maximum(np.abs(res_p), 1.0)
    assert (np.abs(res_c - res_p) / rscale).max() < 1e-13

    ab_c = _compiled.phase_jacobian_bands(r, bp, bm, nu, sigma, h)
    ab_p = jacobian_py(r, bp, bm, nu, sigma, h)
    jscale = np.maximum(np.abs(ab_p), 1.0)
    assert (np.abs(ab_c - ab_p) / jscale).max() < 1e-13


def test_backend_selection_contract():
    assert kernels.EXP_CAP == EXP_CAP == 700.0
    assert kernels.backend_name in ("compiled", "python")
    env = dict(os.environ, MOTORLAB_PURE_PYTHON="1")
    forced = subprocess.run(
        [sys.executable, "-c",
         "from motorlab import kernels; print(kernels.backend_name)"],
        capture_output=True, text=True, env=env, check=True)
    assert forced.stdout.strip() == "python"
    if HAVE_COMPILED:
        env.pop("MOTORLAB_PURE_PYTHON")
        default = subprocess.run(
            [sys.executable, "-c",
             "from motorlab import kernels; print(kernels.backend_name)"],
            capture_output=True, text=True, env=env, check=True)
        assert default.stdout.strip() == "compiled"
