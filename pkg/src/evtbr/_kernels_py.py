"""Pure-numpy kernels with the same contract as the native ``_kernels`` module."""
import numpy as np


def _windows(t, origin, dt):
    return (t - np.uint64(origin)) // np.uint64(dt)


def _last_occurrence(flat):
    # index of the last event (stream order) per distinct target cell
    rev = flat[::-1]
    _, first_in_rev = np.unique(rev, return_index=True)
    return len(flat) - 1 - first_in_rev


def tbr_fill(out, t, x, y, origin, dt, n_bits, g0):
    if len(t) == 0:
        return
    _, h, w = out.shape
    win = _windows(t, origin, dt)
    g = (win // np.uint64(n_bits)).astype(np.int64) - g0
    bits = np.left_shift(np.uint32(1), (win % np.uint64(n_bits)).astype(np.uint32))
    flat = (g * h + y.astype(np.int64)) * w + x.astype(np.int64)
    np.bitwise_or.at(out.reshape(-1), flat, bits)


def polarity_fill(out, t, x, y, p, origin, dt, w0):
    if len(t) == 0:
        return
    _, h, w = out.shape
    win = _windows(t, origin, dt).astype(np.int64) - w0
    flat = (win * h + y.astype(np.int64)) * w + x.astype(np.int64)
    last = _last_occurrence(flat)
    out.reshape(-1)[flat[last]] = np.where(p[last] > 0, 2, 0).astype(np.uint32)


def sae_fill(out, t, x, y, origin, dt, w0):
    if len(t) == 0:
        return
    _, h, w = out.shape
    dt64 = np.uint64(dt)
    rel = t - np.uint64(origin)
    win = rel // dt64
    elapsed = rel - win * dt64
    values = (np.uint64(510) * elapsed + dt64) // (np.uint64(2) * dt64)
    flat = ((win.astype(np.int64) - w0) * h + y.astype(np.int64)) * w + x.astype(np.int64)
    last = _last_occurrence(flat)
    out.reshape(-1)[flat[last]] = values[last].astype(np.uint32)
