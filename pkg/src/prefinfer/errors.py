"""Exception hierarchy shared across the toolkit.

Every failure raised by this package derives from PrefinferError so callers
can catch one base class at pipeline boundaries.
"""


class PrefinferError(Exception):
    pass


# --- data ingestion ---

class MissingColumn(PrefinferError):
    pass


class UnparseableRow(PrefinferError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class EmptyFile(PrefinferError):
    pass


class GapInSeries(PrefinferError):
    def __init__(self, hour: int):
        super().__init__(f"no samples for hour {hour}")
        self.hour = hour


class IndexOutOfRange(PrefinferError):
    pass


# --- environment ---

class NegativeInput(PrefinferError):
    pass


class SteppedAfterTerminal(PrefinferError):
    pass


class ZeroMax(PrefinferError):
    pass


# --- neural nets ---

class ShapeMismatch(PrefinferError):
    pass


class CorruptModel(PrefinferError):
    pass


class VersionMismatch(PrefinferError):
    pass


# --- training / inference ---

class InsufficientData(PrefinferError):
    pass


class InvalidStep(PrefinferError):
    pass


class DegenerateFeature(PrefinferError):
    pass


# --- scenarios / experiments ---

class UnknownScenario(PrefinferError):
    pass


class WindowMismatch(PrefinferError):
    pass


class ModelMissing(PrefinferError):
    pass


# --- CLI ---

class ConfigInvalid(PrefinferError):
    pass


class ArtifactMissing(PrefinferError):
    pass


class IoFailure(PrefinferError):
    pass
