"""Scoring endpoint speaking line-delimited JSON over stdio.

The process announces its capabilities with a hello record, then
answers each request line with a response line carrying the same id.
Scoring comes from a wrapped neural metric (COMET family) or from one
of the deterministic stub modes, which have no dependencies at all.
"""

from .chrf import sentence_chrf
from .core import AdapterConfig, AdapterError, make_backend, parse_mode, score_rows, serve

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "make_backend",
    "parse_mode",
    "score_rows",
    "sentence_chrf",
    "serve",
]
