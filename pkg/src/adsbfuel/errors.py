"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI can print ``code=<Name>`` on stderr.  ``input_error`` separates bad user
input (exit status 1) from failures inside the pipeline (exit status 2).
"""

from __future__ import annotations


class FuelError(Exception):
    input_error = True

    @property
    def code(self) -> str:
        return type(self).__name__


# trajectory
class MalformedRecord(FuelError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTrack(FuelError):
    pass


class TooSparse(FuelError):
    pass


class EmptySlice(FuelError):
    pass


# spectral
class SpanExceedsTM(FuelError):
    pass


# fuelnet
class UnknownAircraftType(FuelError):
    pass


class ShapeMismatch(FuelError):
    pass


class TargetOutOfRange(FuelError):
    pass


class Diverged(FuelError):
    input_error = False


class VersionMismatch(FuelError):
    pass


class CorruptModel(FuelError):
    pass


# monotone
class InvalidSeries(FuelError):
    pass


class OutOfDomain(FuelError):
    pass


class NonMonotonicConstruction(FuelError):
    input_error = False


class NonMonotoneModelOutput(FuelError):
    input_error = False


# metrics
class ZeroTruth(FuelError):
    pass


class ZeroReference(FuelError):
    pass


class DegenerateFit(FuelError):
    pass


# emissions
class SpanMismatch(FuelError):
    pass


class SpecMismatch(FuelError):
    pass
