"""
Exceptions raised by martingal.

Errors about bad arguments are also ValueErrors, so callers that only know
about the standard library can still catch them.

"""


class MartingalError(Exception):
    """ Base class for every error raised by this package. """


class ParseError(MartingalError, ValueError):
    """ Malformed rational, JSON document or MD-system file. """


class NonMonotoneBreakpoints(MartingalError, ValueError):
    pass


class BadEndpoints(MartingalError, ValueError):
    pass


class AtomIndexOutOfRange(MartingalError, IndexError):
    pass


class LevelOutOfRange(MartingalError, ValueError):
    pass


class UnknownCell(MartingalError, KeyError):
    pass


class BadCoefficientCount(MartingalError, ValueError):
    pass


class NotSymmetric(MartingalError, ValueError):
    pass


class NotProbability(MartingalError, ValueError):
    pass


class DomainError(MartingalError, ValueError):
    """ A real parameter (p, lambda, x, ...) lies outside its domain. """


class SizeLimit(MartingalError, ValueError):
    pass


class NotMeanZero(MartingalError, ValueError):
    pass


class Infeasible(MartingalError, ValueError):
    pass


class TrivialSystem(MartingalError, ValueError):
    """ All differences vanish, so the ratio against the square function is undefined. """


class InvalidSystem(MartingalError, ValueError):
    """ The arrays handed to MDSystem do not describe a martingale-difference system. """


class PreconditionError(MartingalError, ValueError):
    """ A transform was applied to a system lacking the structure it needs. """


class NotDyadic(PreconditionError):
    pass


class NotKMinus1Dyadic(PreconditionError):
    pass


class NotIP(PreconditionError):
    pass


class NotMRademacher(PreconditionError):
    pass


class NotPrepared(PreconditionError):
    pass


class CorruptSystem(MartingalError, RuntimeError):
    """ A state that validation rules out was reached inside a transform. """


class ZeroEnvelopeCell(CorruptSystem):
    pass


class EmptySignClass(CorruptSystem):
    pass


class CeilingViolation(MartingalError, RuntimeError):
    """ A search witness beat the proven constant for p >= 3. """
