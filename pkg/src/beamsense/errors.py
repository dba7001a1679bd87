"""Shared exception types."""


class ConfigurationError(ValueError):
    """Mismatched layer/optimizer configuration (wrong dimension, bad split)."""


class ShapeError(ValueError):
    """Array shape incompatible with the requested operation."""


class StateError(RuntimeError):
    """Operation called in the wrong order (e.g. backward before forward)."""


class FormatError(ValueError):
    """On-disk artifact is corrupt, truncated or of an unsupported version."""
