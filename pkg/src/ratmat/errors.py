"""Exception hierarchy.

Every failure mode of the library is a subclass of :class:`RatmatError`
(itself a ``ValueError``).  Failures that mean "the dynamics left the generic
stratum" derive from :class:`GenericityHalt` and carry the step index at which
they happened, so the CLI can map them to a distinct exit status.
"""


class RatmatError(ValueError):
    """Base class for all library errors."""


class ZeroMatrix(RatmatError):
    pass


class NotRankOne(RatmatError):
    pass


class DuplicateAbscissa(RatmatError):
    pass


class InconsistentSamples(RatmatError):
    pass


class ZeroPolynomial(RatmatError):
    pass


class DegenerateAction(RatmatError):
    pass


class CoincidentPoints(RatmatError):
    pass


class AtPole(RatmatError):
    pass


class SingularTwist(RatmatError):
    pass


class NonGeneric(RatmatError):
    pass


class SingularGauge(RatmatError):
    pass


class DegeneratePairing(RatmatError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class WrongPoleCount(RatmatError):
    pass


class DegenerateCoordinates(RatmatError):
    pass


class LogOfZero(RatmatError):
    pass


class GaugeDegenerate(RatmatError):
    pass


class GenericityHalt(RatmatError):
    """Raised when an iterated map loses genericity.

    ``step`` is the 1-based index of the step that failed; ``reports`` holds
    whatever completed before the failure.
    """

    def __init__(self, message, step=None, reports=()):
        super().__init__(message)
        self.step = step
        self.reports = list(reports)


class ShiftCollision(GenericityHalt):
    pass


class PiAtRho(GenericityHalt):
    pass


class OracleMismatch(GenericityHalt):
    pass
