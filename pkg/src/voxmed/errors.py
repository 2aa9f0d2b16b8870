"""Exception types shared across the voxmed package."""


class VoxmedError(Exception):
    """Base class for all typed voxmed errors.

    The ``code`` attribute is the stable machine-readable identifier used in
    API error responses and CLI diagnostics.
    """

    code = "VoxmedError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


# --- audio_io ---

class MalformedHeader(VoxmedError):
    code = "MalformedHeader"


class UnsupportedEncoding(VoxmedError):
    code = "UnsupportedEncoding"


class TruncatedData(VoxmedError):
    code = "TruncatedData"


class InvalidRate(VoxmedError):
    code = "InvalidRate"


class ClipTooLong(VoxmedError):
    code = "ClipTooLong"


# --- dsp ---

class RateMismatch(VoxmedError):
    code = "RateMismatch"


class InvalidStd(VoxmedError):
    code = "InvalidStd"


# --- embedding ---

class ModelFileMissing(VoxmedError):
    code = "ModelFileMissing"


class ShapeMismatch(VoxmedError):
    code = "ShapeMismatch"


class BackendFailure(VoxmedError):
    code = "BackendFailure"


class CacheMiss(BackendFailure):
    code = "CacheMiss"


class FormatError(VoxmedError):
    code = "FormatError"


class DimMismatch(VoxmedError):
    code = "DimMismatch"


# --- classifier ---

class InvalidArch(VoxmedError):
    code = "InvalidArch"


class VersionMismatch(VoxmedError):
    code = "VersionMismatch"


class EmptyInput(VoxmedError):
    code = "EmptyInput"


# --- training ---

class DegenerateDataset(VoxmedError):
    code = "DegenerateDataset"


# --- dataset ---

class BadFilename(VoxmedError):
    code = "BadFilename"


class BadPatientId(VoxmedError):
    code = "BadPatientId"


class ParseError(VoxmedError):
    code = "ParseError"


class DuplicatePatient(VoxmedError):
    code = "DuplicatePatient"


class EmptyDataset(VoxmedError):
    code = "EmptyDataset"


class MissingDiagnosis(VoxmedError):
    code = "MissingDiagnosis"


# --- evaluation ---

class LabelOutOfRange(VoxmedError):
    code = "LabelOutOfRange"


class EmptyMatrix(VoxmedError):
    code = "EmptyMatrix"


# --- service ---

class UnknownDisease(VoxmedError):
    code = "UnknownDisease"
