"""Backend selection for the per-event accumulation loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy implementation in ``_kernels_py`` is used. Both write into a
preallocated ``(frames, height, width)`` uint32 array.
"""
from __future__ import annotations

import contextlib
from types import ModuleType

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _native
except ImportError:  # extension not built
    _native = None

BACKENDS: dict[str, ModuleType] = {"python": _kernels_py}
if _native is not None:
    BACKENDS["native"] = _native

_active: ModuleType = _native if _native is not None else _kernels_py

# 510 * elapsed must not overflow uint64 in the SAE kernel
_SAE_DT_LIMIT = 2**54


def backend_name() -> str:
    return "native" if _active is _native else "python"


def set_backend(name: str) -> None:
    global _active
    try:
        _active = BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


@contextlib.contextmanager
def use_backend(name: str):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _check(out, t, x, y, origin, dt, per_frame, base):
    if out.dtype != np.uint32 or out.ndim != 3 or not out.flags.c_contiguous:
        raise ValueError("out must be a C-contiguous (frames, h, w) uint32 array")
    if len(t) == 0:
        return
    if int(t[0]) < origin:
        raise ValueError("event precedes origin")
    first = (int(t[0]) - origin) // dt // per_frame - base
    last = (int(t[-1]) - origin) // dt // per_frame - base
    if first < 0 or last >= out.shape[0]:
        raise ValueError("events fall outside the output frame range")
    if int(x.max()) >= out.shape[2] or int(y.max()) >= out.shape[1]:
        raise ValueError("event coordinates outside the frame")


def tbr_fill(out, t, x, y, origin: int, dt: int, n_bits: int, g0: int) -> None:
    """OR ``1 << (window % n_bits)`` into ``out[window // n_bits - g0, y, x]`` per event."""
    _check(out, t, x, y, origin, dt, n_bits, g0)
    _active.tbr_fill(out, t, x, y, origin, dt, n_bits, g0)


def polarity_fill(out, t, x, y, p, origin: int, dt: int, w0: int) -> None:
    """Write the level code of the latest event per pixel into ``out[window - w0]``."""
    _check(out, t, x, y, origin, dt, 1, w0)
    _active.polarity_fill(out, t, x, y, p, origin, dt, w0)


def sae_fill(out, t, x, y, origin: int, dt: int, w0: int) -> None:
    """Write the rounded elapsed-time value of the latest event per pixel into ``out[window - w0]``."""
    _check(out, t, x, y, origin, dt, 1, w0)
    impl = _active if dt < _SAE_DT_LIMIT else _sae_fill_exact
    impl.sae_fill(out, t, x, y, origin, dt, w0)


class _sae_fill_exact:
    """Arbitrary-precision path for absurdly large windows."""

    @staticmethod
    def sae_fill(out, t, x, y, origin, dt, w0):
        for ti, xi, yi in zip(t.tolist(), x.tolist(), y.tolist()):
            w, elapsed = divmod(ti - origin, dt)
            out[w - w0, yi, xi] = (510 * elapsed + dt) // (2 * dt)
