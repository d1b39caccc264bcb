"""Exception and warning types shared across the package."""


class NcqoError(Exception):
    """Base class for all domain errors raised by ncqo."""


class UnknownMode(NcqoError, KeyError):
    def __init__(self, mode_id):
        self.mode_id = mode_id
        super().__init__(mode_id)

    def __str__(self):
        return f"unknown mode id {self.mode_id!r}"


class ParseError(NcqoError, ValueError):
    """Malformed operator word. ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


class TermExplosion(NcqoError):
    pass


class MomentTooLarge(NcqoError):
    pass


class InvalidVacuum(NcqoError, ValueError):
    pass


class UnsupportedVacuum(NcqoError):
    pass


class ZeroDenominator(NcqoError, ZeroDivisionError):
    pass


class DimensionCap(NcqoError):
    pass


class ConvergenceFailure(NcqoError):
    pass


class TruncationWarning(UserWarning):
    """Fock-space truncation too coarse for the requested state."""
