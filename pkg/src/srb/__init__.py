"""Regenerating-code storage for sharded ledgers.

A product-matrix MBR code stores alpha coded blocks per node; a joining
node rebuilds its state by downloading one coded block from alpha + 2p
helpers (bootstrap as repair), tolerating p malicious helpers, and any
k + 2p nodes can reconstruct all L original blocks.  The package bundles
the finite-field and Reed-Solomon machinery, the block codec with its file
formats, a deterministic shard simulator, protocol cost analytics, and a
CLI.
"""

from .errors import DecodeFailure, IntegrityError, ShardUnderflowError, SrbError
from .field import binary_field, parse_field, prime_field
from .mbr import MbrParams, NodeRow, message_length

__version__ = "0.1.0"

__all__ = [
    "DecodeFailure",
    "IntegrityError",
    "MbrParams",
    "NodeRow",
    "ShardUnderflowError",
    "SrbError",
    "binary_field",
    "message_length",
    "parse_field",
    "prime_field",
    "__version__",
]
