"""Exception hierarchy shared across the toolkit.

Every error raised on a documented contract violation derives from
SurvxError so callers (and the CLI) can separate usage problems from
runtime failures.
"""


class SurvxError(Exception):
    """Base class for all survx errors."""


# --- image codecs ---------------------------------------------------------

class MalformedFile(SurvxError):
    """File bytes do not parse as the claimed format."""


class UnsupportedFormat(SurvxError):
    """Recognized container, but a variant we do not handle (16-bit, palette...)."""


class UnsupportedChannelCount(SurvxError):
    """Images must carry 1 or 3 channels."""


class ChannelMismatch(SurvxError):
    """Operation requires a specific channel count."""


# --- resampling -----------------------------------------------------------

class DegenerateTarget(SurvxError):
    """Requested output size has a zero dimension."""


class NotDivisible(SurvxError):
    """Image dims must be divisible by the downscale factor."""


# --- network engine -------------------------------------------------------

class ShapeMismatch(SurvxError):
    """Tensor dims inconsistent with the operation."""


class EmptyOutput(SurvxError):
    """Convolution output would have a non-positive spatial extent."""


class ChannelNotDivisible(SurvxError):
    """pixel_shuffle input channels not divisible by r**2."""


class SlopeShapeMismatch(SurvxError):
    """PReLU slope vector does not match the channel count."""


class MissingWeight(SurvxError):
    """A parameter tensor required by the graph is absent."""


class NoTape(SurvxError):
    """backward() called without a recorded forward tape."""


class GraphError(SurvxError):
    """NetworkSpec fails validation (cycle, bad edge, channel mismatch)."""


# --- weight container -----------------------------------------------------

class BadMagic(SurvxError):
    pass


class VersionUnsupported(SurvxError):
    pass


class TruncatedTensor(SurvxError):
    pass


class DuplicateName(SurvxError):
    pass


# --- model building / training --------------------------------------------

class UnsupportedFactor(SurvxError):
    """Generator upscale factor outside {2, 4}."""


class ImageTooSmall(SurvxError):
    """Image smaller than one training patch."""


class EmptyDataset(SurvxError):
    pass


class DivergedLoss(SurvxError):
    """Training cost became non-finite."""


class WeightMismatch(SurvxError):
    """Weights do not fit the network spec / input."""


# --- metrics ---------------------------------------------------------------

class DimMismatch(SurvxError):
    pass


class TooSmall(SurvxError):
    """Image smaller than the SSIM window."""


class WeightShapeMismatch(SurvxError):
    pass


class WeightNormalization(SurvxError):
    """DISTS alpha/beta weights do not sum to 1."""


class TooFewSamples(SurvxError):
    pass


class NotSymmetric(SurvxError):
    pass


class SignificantlyNegativeEigenvalue(SurvxError):
    pass


# --- evaluation harness ----------------------------------------------------

class BadHeader(SurvxError):
    pass


class BadRecord(SurvxError):
    pass


class ScoreOutOfRange(SurvxError):
    pass


class DuplicateRating(SurvxError):
    pass


class Empty(SurvxError):
    pass


class DegenerateVariance(SurvxError):
    pass


class InsufficientPairs(SurvxError):
    pass


class ZeroVariance(SurvxError):
    pass


class IdMismatch(SurvxError):
    pass


class ModelLoadFailure(SurvxError):
    pass


class BenchConfigError(SurvxError):
    pass


# --- serving ---------------------------------------------------------------

class PortInUse(SurvxError):
    pass


class BadManifest(SurvxError):
    pass
