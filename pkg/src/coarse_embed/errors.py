"""Shared exception types and global size caps."""

import os

ENV_CAP = "COARSE_EMBED_CAP"
DEFAULT_POINT_CAP = 2_000_000


class CapExceeded(RuntimeError):
    """A construction would exceed the configured size cap."""


class CoverageError(RuntimeError):
    """A cover failed to contain a point it must contain (carries a witness)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ContractViolation(RuntimeError):
    """Measured statistics violate the contract of a construction."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def point_cap():
    raw = os.environ.get(ENV_CAP)
    if raw is None:
        return DEFAULT_POINT_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{ENV_CAP} must be an integer, got {raw!r}")


def guard_cap(count, what):
    cap = point_cap()
    if count > cap:
        raise CapExceeded(f"{what}: {count} points exceeds cap {cap} (set {ENV_CAP} to raise)")
    return count
