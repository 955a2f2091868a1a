"""Exception hierarchy for the layertext package.

Two broad families matter for callers: ValidationError (bad inputs,
configuration, or file contents -- CLI exit code 2) and ProviderError
(an external helper executable misbehaved -- CLI exit code 3).
"""


class LayerTextError(Exception):
    """Base class for all package errors."""


class ValidationError(LayerTextError, ValueError):
    """Invalid input data, parameters, or file contents."""


class UnsupportedFormatError(ValidationError):
    """File is a format or variant this package deliberately does not read."""


class CorruptDataError(ValidationError):
    """File has the right magic but its contents do not decode."""


class DimensionMismatchError(ValidationError):
    """Two rasters that must share dimensions do not."""


class EmptyDetectionsError(ValidationError):
    """A detection set with no regions was given where one is required."""


class AllBoxesOutOfBoundsError(ValidationError):
    """No detection bbox intersects the image."""


class TooFewPixelsError(ValidationError):
    """Mask selects fewer pixels than clustering needs."""


class MaskCoversImageError(ValidationError):
    """Inpainting hole leaves no known pixels to fill from."""


class NonPositiveScaleError(ValidationError):
    """Scale factors must be strictly positive."""


class NonPositiveGammaError(ValidationError):
    """Gamma / gain parameters must be strictly positive."""


class DegenerateQuadError(ValidationError):
    """Quad has three collinear corners, zero area, or inconsistent winding."""


class SingularTransformError(ValidationError):
    """Homography is not invertible (or the 4-point system is singular)."""


class EmptyMaskError(ValidationError):
    """Operation needs at least one selected pixel."""


class EmptyReferenceError(ValidationError):
    """Histogram reference region selects no pixels."""


class NotNormalizedError(ValidationError):
    """Histogram comparison requires normalized histograms."""


class ZeroVarianceError(ValidationError):
    """Correlation is undefined for a constant histogram."""


class MissingMaskError(ValidationError):
    """Replacement layer carries neither an alpha channel nor a sidecar mask."""


class OversizedLayerError(ValidationError):
    """Replacement layer is larger than the target canvas."""


class ScriptError(ValidationError):
    """Edit script is malformed or references missing pieces."""


class ProviderError(LayerTextError):
    """Base class for external-provider failures."""


class ProviderLaunchFailure(ProviderError):
    """Provider command could not be started at all."""


class ProviderNonZeroExit(ProviderError):
    """Provider ran but exited with a non-zero status."""

    def __init__(self, message, stderr=""):
        super().__init__(message)
        self.stderr = stderr


class ProviderBadOutput(ProviderError):
    """Provider exited 0 but its output file is missing, malformed, or the wrong size."""
