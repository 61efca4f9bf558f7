# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Native accumulation kernels.

Callers guarantee: events sorted by t, t >= origin, coordinates inside the
frame, and every event's window/group inside ``out``. No checks are made here.
"""
from libc.stdint cimport int8_t, int64_t, uint16_t, uint32_t, uint64_t


def tbr_fill(uint32_t[:, :, ::1] out, const uint64_t[::1] t, const uint16_t[::1] x,
             const uint16_t[::1] y, uint64_t origin, uint64_t dt, uint32_t n_bits,
             int64_t g0):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef uint64_t w
    with nogil:
        for i in range(n):
            w = (t[i] - origin) // dt
            out[<int64_t>(w // n_bits) - g0, y[i], x[i]] |= (<uint32_t>1) << (w % n_bits)


def polarity_fill(uint32_t[:, :, ::1] out, const uint64_t[::1] t, const uint16_t[::1] x,
                  const uint16_t[::1] y, const int8_t[::1] p, uint64_t origin, uint64_t dt,
                  int64_t w0):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef uint64_t w
    with nogil:
        for i in range(n):
            w = (t[i] - origin) // dt
            out[<int64_t>w - w0, y[i], x[i]] = 2 if p[i] > 0 else 0


def sae_fill(uint32_t[:, :, ::1] out, const uint64_t[::1] t, const uint16_t[::1] x,
             const uint16_t[::1] y, uint64_t origin, uint64_t dt, int64_t w0):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef uint64_t w, elapsed
    with nogil:
        for i in range(n):
            w = (t[i] - origin) // dt
            elapsed = (t[i] - origin) - w * dt
            # round half away from zero of 255 * elapsed / dt
            out[<int64_t>w - w0, y[i], x[i]] = <uint32_t>((510 * elapsed + dt) // (2 * dt))
