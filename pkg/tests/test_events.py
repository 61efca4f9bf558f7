import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evtbr.events import (
    EncodingConfig,
    Event,
    EventStream,
    SensorGeometry,
    Strategy,
    ValidationError,
    validate_stream,
    window_index,
)
from oracles import window_of

G = SensorGeometry(128, 128)


def test_empty_stream_is_valid():
    assert validate_stream(EventStream(G)) == []


def test_non_monotonic_reported_at_index():
    s = EventStream.from_events(G, [(5, 0, 0, 1), (3, 0, 0, 1)])
    (v,) = validate_stream(s)
    assert v.index == 1
    assert str(v) == "non-monotonic at index 1"


def test_x_bound_is_exclusive():
    s = EventStream.from_events(G, [(0, 128, 0, 1)])
    assert [str(v) for v in validate_stream(s)] == ["x out of bounds at index 0"]


def test_all_violations_reported():
    s = EventStream.from_events(SensorGeometry(4, 4), [(5, 0, 9, 1), (3, 0, 0, 0)])
    msgs = [str(v) for v in validate_stream(s)]
    assert msgs == ["y out of bounds at index 0", "non-monotonic at index 1", "invalid polarity at index 1"]


def test_equal_timestamps_allowed():
    s = EventStream.from_events(G, [(7, 0, 0, 1), (7, 1, 0, -1)])
    assert validate_stream(s) == []


@pytest.mark.parametrize("w,h", [(0, 10), (10, 0), (65536, 1)])
def test_geometry_bounds(w, h):
    with pytest.raises(ValidationError):
        SensorGeometry(w, h)


def test_stream_is_immutable():
    s = EventStream.from_events(G, [(0, 1, 2, 1)])
    with pytest.raises(ValueError):
        s.t[0] = 5


def test_stream_does_not_alias_caller_arrays():
    t = np.array([1, 2], dtype=np.uint64)
    s = EventStream(G, t, [0, 0], [0, 0], [1, 1])
    t[0] = 99
    assert s[0] == Event(1, 0, 0, 1)


def test_column_range_checked():
    with pytest.raises(ValidationError):
        EventStream(G, [1], [70000], [0], [1])


@pytest.mark.parametrize("t,expected", [(0, 0), (2500, 1), (2499, 0), (19999, 7)])
def test_window_index_examples(t, expected):
    assert window_index(t, 0, 2500) == expected


def test_window_index_matches_grid_walk():
    for t in range(0, 20_000, 7):
        assert window_index(t, 0, 2500) == window_of(t, 0, 2500)


def test_window_index_before_origin():
    with pytest.raises(ValueError, match="event precedes origin"):
        window_index(5, 10, 2500)


@given(st.integers(0, 10**12), st.integers(0, 10**6), st.integers(1, 10**5))
def test_window_partition(origin, offset, dt):
    t = origin + offset
    w = window_index(t, origin, dt)
    assert origin + w * dt <= t < origin + (w + 1) * dt


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 5000))
def test_window_monotone(a, b, dt):
    lo, hi = sorted((a, b))
    assert window_index(lo, 0, dt) <= window_index(hi, 0, dt)


def test_config_validation():
    with pytest.raises(ValidationError):
        EncodingConfig(0)
    with pytest.raises(ValidationError):
        EncodingConfig(10, n_bits=33)
    with pytest.raises(ValidationError):
        EncodingConfig(10, n_bits=0)
    assert EncodingConfig(10, 8, "sae").effective_bits == 1
    assert EncodingConfig(10, 8, Strategy.TBR).effective_bits == 8


def test_origin_defaults_to_first_event():
    s = EventStream.from_events(G, [(1000, 0, 0, 1)])
    assert EncodingConfig(10).origin_for(s) == 1000
    assert EncodingConfig(10, t_origin_us=3).origin_for(s) == 3
