"""Exception types shared across the toolkit.

Everything raised on purpose derives from VpkitError so callers (and the
CLI) can separate domain failures from genuine bugs.
"""


class VpkitError(Exception):
    """Base class for all toolkit errors."""


class DegenerateDirection(VpkitError):
    """A direction vector could not be normalized (norm below 1e-9)."""


class IdenticalLines(VpkitError):
    """Two lines coincide, so their intersection is undefined."""


class ChannelMismatch(VpkitError):
    """Color image does not have the expected channel layout."""


class ImageTooSmall(VpkitError):
    """Image is smaller than the 3x3 filter support."""


class FlatRegion(VpkitError):
    """Edge direction requested where gradient magnitude is below epsilon."""


class EmptyVpSet(VpkitError):
    """A VP loss was requested with no vanishing points."""


class ShapeMismatch(VpkitError):
    """Array operands do not share a compatible shape."""


class PredictorShapeMismatch(ShapeMismatch):
    """Noise predictor returned a tensor of the wrong shape."""


class TimestepOutOfRange(VpkitError):
    """Timestep outside the schedule's valid range."""


class MaskNotBinary(VpkitError):
    """Latent mask contains entries other than 0 and 1."""


class DegenerateRegion(VpkitError):
    """Outline pair encloses (numerically) no area."""


class NoDetections(VpkitError):
    """VP detector produced no candidates for an image."""


class EmptyInput(VpkitError):
    """An aggregate was requested over an empty collection."""


class ValidationFailed(VpkitError):
    """A record failed validation; carries field-level messages."""

    def __init__(self, details):
        self.details = list(details)
        super().__init__("; ".join(f"{d['field']}: {d['message']}" for d in self.details))


class NotFound(VpkitError):
    """Requested image or annotation does not exist."""


class Conflict(VpkitError):
    """Optimistic-concurrency precondition failed."""


class IncompleteAnnotation(VpkitError):
    """Operation requires a complete annotation record."""

    def __init__(self, image_ids):
        self.image_ids = list(image_ids)
        super().__init__("incomplete annotation for: " + ", ".join(self.image_ids))


class StoreUnavailable(VpkitError):
    """Annotation store directory is missing or unreadable."""
