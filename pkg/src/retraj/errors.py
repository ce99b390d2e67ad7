"""Exception types shared across the pipeline."""


class RetrajError(Exception):
    """Base class for all pipeline errors."""


class ValidationError(RetrajError, ValueError):
    """Invalid user-supplied values (specs, poses, configs)."""


class ShapeError(ValidationError):
    """Array dimensions disagree with what an operation requires."""


class InvalidDepthError(ValidationError):
    """Depth value is non-positive or non-finite."""


class BehindCameraError(ValidationError):
    """Point lies at or behind the near plane of the camera."""


class FormatError(RetrajError, IOError):
    """On-disk data does not conform to the expected file format."""
