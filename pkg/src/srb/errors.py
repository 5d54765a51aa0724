"""Exception types shared across the package."""


class SrbError(Exception):
    """Base class for protocol-level failures."""


class DecodeFailure(SrbError):
    """No codeword fits the received symbols within the error budget."""


class IntegrityError(SrbError):
    """Recovered or observed data violates a structural invariant."""


class ShardUnderflowError(SrbError):
    """A shard no longer has enough members to serve repairs."""
