"""Backend selection for the numeric kernels.

The compiled ``_kernels`` extension is used when it has been built; otherwise
the pure-Python ``_kernels_py`` module is used. Set ``SYNERGID_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and os.environ.get("SYNERGID_PURE_PYTHON", "") in ("", "0"):
    backend = _compiled
    BACKEND = "cython"
else:
    backend = _kernels_py
    BACKEND = "python"

fingertip_forward = backend.fingertip_forward
solve_trunk_pitch = backend.solve_trunk_pitch
synergy_integrate = backend.synergy_integrate
interp_uniform = backend.interp_uniform
peak_displacements = backend.peak_displacements

_NAMES = ("fingertip_forward", "solve_trunk_pitch", "synergy_integrate", "interp_uniform",
          "peak_displacements")


def use_backend(name: str) -> None:
    """Switch every kernel to backend ``name`` for the rest of the process."""
    global BACKEND
    try:
        mod = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None
    g = globals()
    for n in _NAMES:
        g[n] = getattr(mod, n)
    BACKEND = name
