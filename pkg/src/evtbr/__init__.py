"""Temporal Binary Representation encoders for event-camera streams."""
from .encoder import (
    BinarySlice,
    EncodedFrame,
    StreamingEncoder,
    binarize,
    decode_tbr,
    encode_polarity,
    encode_sae,
    encode_stream,
    encode_tbr,
    normalize_tbr,
)
from .events import (
    EncodingConfig,
    Event,
    EventStream,
    SensorGeometry,
    Strategy,
    ValidationError,
    validate_stream,
    window_index,
)
from .ingest import FormatError
from .kernels import backend_name

__all__ = [
    "BinarySlice",
    "EncodedFrame",
    "EncodingConfig",
    "Event",
    "EventStream",
    "FormatError",
    "SensorGeometry",
    "Strategy",
    "StreamingEncoder",
    "ValidationError",
    "backend_name",
    "binarize",
    "decode_tbr",
    "encode_polarity",
    "encode_sae",
    "encode_stream",
    "encode_tbr",
    "normalize_tbr",
    "validate_stream",
    "window_index",
]
