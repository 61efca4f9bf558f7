import importlib
import sys

import numpy as np
import pytest

from evtbr import kernels


def test_fallback_selected_without_extension(monkeypatch):
    import evtbr

    monkeypatch.setitem(sys.modules, "evtbr._kernels", None)
    monkeypatch.delattr(evtbr, "_kernels", raising=False)
    try:
        reloaded = importlib.reload(kernels)
        assert reloaded.backend_name() == "python"
        assert set(reloaded.BACKENDS) == {"python"}
    finally:
        monkeypatch.undo()
        importlib.reload(kernels)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")


def cols(events):
    t, x, y, p = zip(*events)
    return (np.array(t, np.uint64), np.array(x, np.uint16), np.array(y, np.uint16), np.array(p, np.int8))


def test_tbr_fill_bits(backend):
    t, x, y, _ = cols([(0, 0, 0, 1), (25, 0, 0, 1), (79, 1, 0, -1), (80, 1, 0, 1)])
    out = np.zeros((2, 1, 2), dtype=np.uint32)
    kernels.tbr_fill(out, t, x, y, 0, 10, 8, 0)
    assert out.tolist() == [[[1 | 4, 128]], [[0, 1]]]


def test_tbr_fill_group_offset(backend):
    t, x, y, _ = cols([(85, 0, 0, 1)])
    out = np.zeros((1, 1, 1), dtype=np.uint32)
    kernels.tbr_fill(out, t, x, y, 0, 10, 8, 1)
    assert out.tolist() == [[[1]]]


def test_fill_guards(backend):
    t, x, y, p = cols([(85, 0, 0, 1)])
    with pytest.raises(ValueError):
        kernels.tbr_fill(np.zeros((1, 1, 1), np.uint32), t, x, y, 0, 10, 8, 0)
    with pytest.raises(ValueError):
        kernels.polarity_fill(np.zeros((9, 1, 1), np.int64), t, x, y, p, 0, 10, 0)
    with pytest.raises(ValueError):
        kernels.sae_fill(np.zeros((9, 1, 1), np.uint32), t, x + 1, y, 0, 10, 0)
    with pytest.raises(ValueError):
        kernels.sae_fill(np.zeros((9, 1, 1), np.uint32), t, x, y, 100, 10, 0)


def test_polarity_fill_last_wins(backend):
    t, x, y, p = cols([(1, 0, 0, 1), (2, 0, 0, -1), (2, 0, 0, 1), (3, 1, 0, -1)])
    out = np.ones((1, 1, 2), dtype=np.uint32)
    kernels.polarity_fill(out, t, x, y, p, 0, 10, 0)
    assert out.tolist() == [[[2, 0]]]
