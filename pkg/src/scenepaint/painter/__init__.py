"""Depth-conditioned generation/inpainting backends behind one contract."""

from scenepaint.painter.contract import (
    BackendParams,
    PaintKind,
    PaintRequest,
    PaintResult,
    Painter,
    decode_request,
    encode_request,
    finalize_result,
    request_digest,
)
from scenepaint.painter.mock import MockPainter
from scenepaint.painter.remote import BackendConfig, RemotePainter, load_backend_config
from scenepaint.painter.scorers import NullScorer, RemoteScorer, Scorer

__all__ = [
    "BackendParams",
    "PaintKind",
    "PaintRequest",
    "PaintResult",
    "Painter",
    "decode_request",
    "encode_request",
    "finalize_result",
    "request_digest",
    "MockPainter",
    "BackendConfig",
    "RemotePainter",
    "load_backend_config",
    "NullScorer",
    "RemoteScorer",
    "Scorer",
]
