"""Exception hierarchy.

Every error raised for a numerical or domain reason derives from
:class:`TippingscopeError`; the command line maps those to exit code 2.
"""


class TippingscopeError(Exception):
    """Base class for domain errors."""


# integration
class NonFiniteEvaluation(TippingscopeError):
    pass


class StepUnderflow(TippingscopeError):
    pass


class OutOfRange(TippingscopeError):
    pass


class Divergence(TippingscopeError):
    """A trajectory left the guard band before reaching its target time."""

    def __init__(self, message, t_escape=None, direction=None):
        super().__init__(message)
        self.t_escape = t_escape
        self.direction = direction


# models
class InvalidAnchor(TippingscopeError):
    pass


# period maps and bifurcation values
class WindowTooSmall(TippingscopeError):
    pass


class NonDecayingKernel(TippingscopeError):
    pass


class BadBracket(TippingscopeError):
    pass


class Ambiguous(TippingscopeError):
    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence or {}


class NoBracket(TippingscopeError):
    def __init__(self, message, omegas=()):
        super().__init__(message)
        self.omegas = list(omegas)


# transitions
class UnexpectedRootCount(TippingscopeError):
    pass


class NotConverged(TippingscopeError):
    pass


# splines
class InvalidGeometry(TippingscopeError):
    pass


class OutOfDomain(TippingscopeError):
    pass


class NonPositiveCurrentGeneration(TippingscopeError):
    pass


class RankDeficient(TippingscopeError):
    pass
