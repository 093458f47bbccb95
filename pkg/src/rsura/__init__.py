"""Random-spreading unsourced random access over the real Gaussian MAC."""

from .codebook import SignatureCodebook, column_to_header, generate, header_to_column
from .config import (
    DetectionPolicy,
    PowerProfile,
    SystemConfig,
    load_config,
    noise_variance,
)
from .detect import SOMP, ActiveSet, somp
from .receiver import DecodedList, IterativeGaussianReceiver, Truth

__all__ = [
    "SOMP",
    "ActiveSet",
    "DecodedList",
    "DetectionPolicy",
    "IterativeGaussianReceiver",
    "PowerProfile",
    "SignatureCodebook",
    "SystemConfig",
    "Truth",
    "column_to_header",
    "generate",
    "header_to_column",
    "load_config",
    "noise_variance",
    "somp",
]

__version__ = "0.1.0"
