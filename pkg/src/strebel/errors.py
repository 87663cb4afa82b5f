"""Exception hierarchy.

Every failure raised by the library derives from :class:`StrebelError`, split
into configuration problems (bad input) and numerical problems (a computation
that could not meet its accuracy contract). The CLI maps the two families to
exit codes 2 and 3.
"""


class StrebelError(Exception):
    pass


class ConfigError(StrebelError, ValueError):
    pass


class NumericalError(StrebelError, ArithmeticError):
    pass


# -- qd_core -----------------------------------------------------------------

class DuplicatePoles(ConfigError):
    pass


class ZeroWeight(ConfigError):
    pass


class NonpositiveTotalWeight(ConfigError):
    pass


class EvaluationAtPole(NumericalError):
    pass


class RootSolverFailure(NumericalError):
    pass


# -- tracer ------------------------------------------------------------------

class NearCriticalPoint(NumericalError):
    pass


class NoClosure(NumericalError):
    pass


class TraceEscape(NumericalError):
    pass


class BoxTooSmall(NumericalError):
    pass


# -- confmap -----------------------------------------------------------------

class SolverSingular(NumericalError):
    pass


class P0Outside(ConfigError):
    pass


class TooCloseToBoundary(NumericalError):
    pass


class PoleOnWrongSide(ConfigError):
    pass


class BranchPathCrossesPole(NumericalError):
    pass


# -- fingerprint -------------------------------------------------------------

class CurveMismatch(ConfigError):
    pass


class CenterOnCircle(ConfigError):
    pass


class NonMonotone(NumericalError):
    pass


class NonUnitModulus(NumericalError):
    pass


class WrongDomainClass(ConfigError):
    """Raised when an operation is applied to a component of the wrong class."""
