"""
Exception hierarchy for the p-elastica toolkit.

Domain errors flag violated preconditions (bad parameters, unsolvable
configurations). Numerical errors flag a computation that could not meet
its tolerance. The command line maps the first family to exit status 1
and the second to exit status 2.
"""

from typing import Optional, Tuple


class PElasticaError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(PElasticaError, ValueError):
    """A precondition on the inputs does not hold"""


class NumericalError(PElasticaError, ArithmeticError):
    """A numerical kernel failed to reach its tolerance"""


class ConfigError(DomainError):
    """Invalid command line or configuration file input"""


class DivergentIntegralError(DomainError):
    """The requested p-elliptic integral is infinite"""


class NoWavelikeModulusError(DomainError):
    """No modulus q solves Q_p(q) = -r; the flat-core branch applies"""


class FlatCoreSumError(DomainError):
    """Flat lengths do not add up to the value the ratio r prescribes"""


class BranchError(DomainError):
    """A hooked branch is inconsistent with its problem"""


class PartitionUnavailableError(DomainError):
    """Too few loop apices to cut a discrete curve into hooked pieces"""


class LambdaUndeterminedError(DomainError):
    """The multiplier cannot be fitted because the curvature vanishes"""


class IntegrationError(NumericalError):
    """Adaptive quadrature did not converge"""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class NaNIntegrandError(NumericalError):
    """The integrand returned NaN"""

    def __init__(self, abscissa: float):
        super().__init__(f"integrand returned NaN at x={abscissa!r}")
        self.abscissa = abscissa


class NoBracketError(NumericalError):
    """Root finder was given endpoints of the same sign"""


class RootFindingError(NumericalError):
    """Root finder ran out of iterations"""

    def __init__(self, message: str, bracket: Optional[Tuple[float, float]] = None):
        suffix = f" (last bracket={bracket!r})" if bracket is not None else ""
        super().__init__(message + suffix)
        self.bracket = bracket


class ProjectionError(NumericalError):
    """Constraint projection did not converge"""

