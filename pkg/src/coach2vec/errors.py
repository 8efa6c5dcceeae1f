"""Exception hierarchy shared by all pipeline stages."""


class Coach2VecError(Exception):
    """Base class. ``stage`` is filled in by the pipeline when an error escapes a stage."""

    stage: str | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class MalformedRecord(Coach2VecError, ValueError):
    pass


class UnknownMatch(Coach2VecError, KeyError):
    pass


class UnknownTeam(Coach2VecError, ValueError):
    pass


class UnsortedInput(Coach2VecError, ValueError):
    pass


class DegeneratePossession(Coach2VecError, ValueError):
    pass


class EmptyCorpus(Coach2VecError, ValueError):
    pass


class EmptyInput(Coach2VecError, ValueError):
    pass


class TooFewPoints(Coach2VecError, ValueError):
    pass


class NotAShot(Coach2VecError, ValueError):
    pass


class NoMatches(Coach2VecError, ValueError):
    pass


class ClusterCountMismatch(Coach2VecError, ValueError):
    pass


class DimensionMismatch(Coach2VecError, ValueError):
    pass


class StaleCache(Coach2VecError, ValueError):
    pass


class ShapeMismatch(Coach2VecError, ValueError):
    pass


class NonFiniteLoss(Coach2VecError, FloatingPointError):
    pass


class UnknownKey(Coach2VecError, KeyError):
    pass


class InvalidConfig(Coach2VecError, ValueError):
    pass


class FormatVersionError(Coach2VecError, ValueError):
    pass
