"""
Exception hierarchy for the solver
Every failure carries a stable machine code so the CLI can emit it as JSON
"""
from typing import Any, Dict, Optional


class IsingError(Exception):
    """Base class for all solver errors"""

    code = "ising_error"

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def to_dict(self) -> dict:
        """Render the error as a JSON-friendly mapping"""
        return {
            "code": self.code,
            "type": type(self).__name__,
            "message": self.message,
            "context": self.context,
        }


class InvalidSpec(IsingError):
    code = "invalid_spec"


class InvalidPair(IsingError):
    code = "invalid_pair"


class CrossingAuxEdges(IsingError):
    code = "crossing_aux_edges"


class MultipleCrossings(IsingError):
    code = "multiple_crossings"


class InvalidTuple(IsingError):
    code = "invalid_tuple"


class NotAntisymmetric(IsingError):
    code = "not_antisymmetric"


class OddDimension(IsingError):
    code = "odd_dimension"


class DimensionTooLarge(IsingError):
    code = "dimension_too_large"


class Singular(IsingError):
    code = "singular"


class MissingInput(IsingError):
    code = "missing_input"


class TooLarge(IsingError):
    code = "too_large"


class RangeTooLarge(IsingError):
    code = "range_too_large"


class QuadratureNotConverged(IsingError):
    code = "quadrature_not_converged"


class SumNotConverged(IsingError):
    code = "sum_not_converged"


class FitRejected(IsingError):
    code = "fit_rejected"


class ConfigError(IsingError):
    code = "config_error"


class OutputError(IsingError):
    code = "output_error"
