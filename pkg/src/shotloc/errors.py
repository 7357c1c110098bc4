"""Exception taxonomy shared across the pipeline."""


class ShotlocError(Exception):
    """Base class for all library errors."""


# --- audio ---

class MalformedWav(ShotlocError):
    """RIFF/WAVE container is damaged or truncated."""


class UnsupportedEncoding(ShotlocError):
    """WAV is not 16-bit PCM with 1 or 2 channels."""


class SignalTooShort(ShotlocError):
    """Fewer samples than one analysis frame."""


class InsufficientData(ShotlocError):
    """Not enough feature frames to build the requested codebook."""


class EmptySegment(ShotlocError):
    """A segment produced no feature frames."""


# --- scoring ---

class DegenerateLabels(ShotlocError):
    """Training set contains only one class."""


class DimensionMismatch(ShotlocError):
    """Feature/model or frame dimensionalities disagree."""


class EmptyRanking(ShotlocError):
    """Reranking was asked to refine an empty list."""


# --- optical flow ---

class FrameTooSmall(ShotlocError):
    """Frames below the minimum solvable size."""


class BadMagic(ShotlocError):
    """Flow file does not start with the float tag 202021.25 ("PIEH")."""


class TruncatedFile(ShotlocError):
    """Flow file ends before the declared payload."""


# --- detections / geometry ---

class SchemaError(ShotlocError):
    """A record failed validation. Carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class EmptyFile(ShotlocError):
    """An input file contains no usable records."""


class DegenerateGeometry(ShotlocError):
    """Shooter reference point and smoke centroid coincide."""


# --- evaluation ---

class MissingGroundTruth(ShotlocError):
    """Annotation carries no ground-truth events."""


class EmptyResults(ShotlocError):
    """Report requested over zero case results."""


# --- pipeline ---

class StageFailed(ShotlocError):
    """A pipeline stage raised; carries the stage name and cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class MissingInput(ShotlocError):
    """A stage's required input artifact does not exist yet."""
