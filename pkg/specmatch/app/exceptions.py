"""Error taxonomy for SpecMatch.

Every error carries the process exit code the CLI reports for it: 2 for
usage/parse/parameter problems, 1 for numerical or verification failures.
"""


class SpecMatchError(Exception):
    """Base class for all SpecMatch errors"""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidMatrix(SpecMatchError, ValueError):
    """Matrix is not square, not finite, or not symmetric"""

    exit_code = 2


class NumericalFailure(SpecMatchError, ArithmeticError):
    """A dense solver did not converge or hit a vanishing denominator"""


class SingularShift(SpecMatchError, ArithmeticError):
    """Real spectral parameter coincides with an eigenvalue"""


class BranchCutViolation(SpecMatchError, ValueError):
    """Stieltjes transform evaluated on its branch cut [-2, 2]"""

    exit_code = 2


class DomainError(SpecMatchError, ValueError):
    """Argument outside the domain of the operation"""

    exit_code = 2


class ModelParamError(SpecMatchError, ValueError):
    """Random graph model parameter out of range"""

    exit_code = 2


class DimensionError(SpecMatchError, ValueError):
    """Operands have incompatible dimensions"""

    exit_code = 2


class ParamError(SpecMatchError, ValueError):
    """Algorithm parameter out of range (e.g. eta <= 0)"""

    exit_code = 2


class NormBoundViolated(SpecMatchError, ValueError):
    """Spectral norm exceeds the bound required by the contour representation"""

    exit_code = 2


class SizeError(SpecMatchError, ValueError):
    """Problem too large for a dense or exhaustive oracle"""

    exit_code = 2


class ConfigError(SpecMatchError, ValueError):
    """Experiment configuration could not be parsed or validated"""

    exit_code = 2


class IoError(SpecMatchError, OSError):
    """Reading or writing a dump file failed"""

    exit_code = 2
