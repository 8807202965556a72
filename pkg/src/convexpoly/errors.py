"""Exception hierarchy shared by all modules."""


class ConvexPolyError(Exception):
    """Base class for every error raised by the package."""


# geometry
class InvalidPolyomino(ConvexPolyError, ValueError):
    pass


class EmptyInput(InvalidPolyomino):
    pass


class BadSpan(InvalidPolyomino):
    pass


class BrokenAdjacency(InvalidPolyomino):
    pass


class NotRowConvex(InvalidPolyomino):
    pass


# enumerator
class BudgetTooSmall(ConvexPolyError, ValueError):
    pass


class UnknownStatistic(ConvexPolyError, KeyError):
    pass


class UncertifiableRange(ConvexPolyError, ValueError):
    pass


# series
class SeriesError(ConvexPolyError, ArithmeticError):
    pass


class VarMismatch(SeriesError):
    pass


class NotAUnit(SeriesError):
    pass


class NotUnitOne(SeriesError):
    pass


class NotDivisible(SeriesError):
    pass


class IllegalComposition(SeriesError):
    pass


class BoxOverflow(SeriesError):
    pass


class OutsideBox(SeriesError, IndexError):
    pass


class OddPartNonzero(SeriesError):
    pass


# gfs / recurrences / formulas
class UnknownName(ConvexPolyError, KeyError):
    pass


class InconsistentBounds(ConvexPolyError, ValueError):
    pass


class OutOfDomain(ConvexPolyError, ValueError):
    pass


class IntegralityViolation(ConvexPolyError, ArithmeticError):
    pass


class SourceUnavailable(ConvexPolyError, ValueError):
    pass
