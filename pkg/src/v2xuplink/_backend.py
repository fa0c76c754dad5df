"""Kernel backend selection.

The Monte Carlo engine's hot reductions exist twice, as numba @njit loops
and as pure-numpy array code. The environment variable V2X_BACKEND picks
the default: "numba" (used when available), or "numpy" to force the
fallback. Callers can also request a backend explicitly, which is how the
benchmark times both in one process.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_BACKENDS = {"numpy": _kernels_numpy}

try:
    from . import _kernels_numba

    _BACKENDS["numba"] = _kernels_numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _HAVE_NUMBA = False


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend() -> str:
    env = os.environ.get("V2X_BACKEND", "").strip().lower()
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"V2X_BACKEND={env!r} not available; choose from {available_backends()}"
            )
        return env
    return "numba" if _HAVE_NUMBA else "numpy"


def kernels(backend: str | None = None):
    """Return the kernel namespace for ``backend`` (default from env)."""
    name = backend or default_backend()
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {available_backends()}")
    return _BACKENDS[name]
