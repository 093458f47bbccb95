"""Rate-1/3 LDPC channel code with a soft-in/soft-out decoder."""

from importlib import resources

from .code import (
    AlistError,
    ParityCheckMatrix,
    encode,
    gf2_rank,
    load_alist,
    read_alist,
    syndrome_check,
    to_alist,
)
from .decoder import LLR_CLIP, decode_siso, hard_decision

__all__ = [
    "AlistError",
    "LLR_CLIP",
    "ParityCheckMatrix",
    "decode_siso",
    "default_code",
    "encode",
    "gf2_rank",
    "hard_decision",
    "load_alist",
    "read_alist",
    "syndrome_check",
    "to_alist",
]

DEFAULT_ALIST = "peg_264_88.alist"

_cache = {}


def default_code() -> ParityCheckMatrix:
    """The shipped (264, 88) PEG code, info bits in positions 0..87."""
    if "default" not in _cache:
        text = resources.files(__package__).joinpath("data", DEFAULT_ALIST).read_text()
        _cache["default"] = load_alist(text, rows=176, cols=264)
    return _cache["default"]
