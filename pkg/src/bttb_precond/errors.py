"""Exceptions raised by the package."""


class BTTBError(Exception):
    """Base class for all errors raised here."""


class DimensionMismatch(BTTBError, ValueError):
    pass


class AllZeroSpectrum(BTTBError, ValueError):
    """The largest eigenvalue magnitude is zero, so no truncation index exists."""


class RuleMismatch(BTTBError, ValueError):
    """The equal-factor selection rule was requested for unequal factors."""


class SingularRetainedEigenvalue(BTTBError, ZeroDivisionError):
    pass


class UnsupportedFormat(BTTBError, ValueError):
    pass


class NonSquare(BTTBError, ValueError):
    pass


class TooLarge(BTTBError, ValueError):
    """Dense materialization refused above the size cap."""


class RankDeficiencyMismatch(BTTBError, ValueError):
    pass
