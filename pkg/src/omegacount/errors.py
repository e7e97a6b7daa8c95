"""Exception types shared across the package."""


class OmegaCountError(Exception):
    """Base class for data and geometry errors raised by this package."""


class DecodeError(OmegaCountError):
    """Malformed or unsupported image stream. Carries the offending byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DimensionMismatchError(OmegaCountError):
    """Frame dimensions disagree with the model or the rest of a sequence."""


class TooSmallToTraceError(OmegaCountError):
    """Component too small for boundary tracing (area 1..3)."""


class DegenerateContourError(OmegaCountError):
    """Contour segment is empty or flat beyond use."""


class DegenerateHullError(OmegaCountError):
    """Fewer than 3 points, or all points collinear."""


class TooShortPathError(OmegaCountError):
    """Path shorter than the curvature stencil requires."""


class CalibrationError(OmegaCountError):
    """Calibration corpus unusable (e.g. only one class present)."""


class ShapeFitError(OmegaCountError):
    """Generated shape does not fit the requested canvas."""
