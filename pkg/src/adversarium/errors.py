"""Exception types shared across the package.

The CLI maps the three categorized errors onto exit codes: parse errors
exit with 2, infeasible inputs with 3 and exceeded budgets with 4.
"""


class AdversariumError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(AdversariumError, ValueError):
    """Malformed input file or command-line value."""

    exit_code = 2


class InfeasibleError(AdversariumError, ValueError):
    """A certificate, witness or dual solution fails its constraints."""

    exit_code = 3


class BudgetError(AdversariumError, RuntimeError):
    """A requested instance exceeds the dimension budget of a routine."""

    exit_code = 4


class NotHermitianError(AdversariumError, ValueError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class SingularMatrixError(AdversariumError, ValueError):
    """A linear system is singular within tolerance."""
