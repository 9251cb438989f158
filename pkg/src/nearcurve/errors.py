"""Exception types; each carries the CLI exit code it maps to."""


class NearCurveError(Exception):
    exit_code = 1


class PreconditionError(NearCurveError, ValueError):
    """An input violates an operation's stated preconditions."""

    exit_code = 2


class CertificationError(NearCurveError, ArithmeticError):
    """Interval refinement hit the precision cap without a decision."""

    exit_code = 3


class PipelineIncomplete(NearCurveError):
    """Some occupied box admitted no auxiliary form up to the degree cap."""

    exit_code = 4


class FormVanishes(NearCurveError, ValueError):
    """The binary form is zero at the requested point."""

    exit_code = 2


class NoBasePoint(NearCurveError, LookupError):
    """No rational point found within the search bound (not a proof of insolubility)."""

    exit_code = 2
