"""Kernel backend selection.

Imports the compiled assembly kernels when the extension module built, and
falls back to the numpy implementations otherwise.  Set MOTORLAB_PURE_PYTHON
to any non-empty value to force the fallback (used by the parity tests and
the benchmark).
"""

import os

if os.environ.get("MOTORLAB_PURE_PYTHON"):
    from motorlab import _kernels_py as _impl
else:
    try:
        from motorlab import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from motorlab import _kernels_py as _impl

backend_name = _impl.backend_name
EXP_CAP = _impl.EXP_CAP
bernoulli = _impl.bernoulli
phase_residual = _impl.phase_residual
phase_jacobian_bands = _impl.phase_jacobian_bands


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from motorlab import _kernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names
