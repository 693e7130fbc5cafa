"""folflow: leafwise geometric-flow simulations on discrete fibers."""

from .errors import (
    CflViolation,
    ConvergenceFailure,
    FolflowError,
    GapTooSmall,
    InconsistentData,
    NonPositiveField,
    NotConservative,
    NotConverged,
    ParseError,
    ProfileDegenerate,
    SolverSingular,
    ValidationError,
)
from .fiber import (
    FiberGrid,
    ScalarField,
    Topology,
    VectorAlongFiber,
    build_grid,
    derivative,
    divergence,
    grad_log,
    integrate,
    laplacian,
)

__version__ = "0.1.0"

__all__ = [
    "CflViolation",
    "ConvergenceFailure",
    "FolflowError",
    "GapTooSmall",
    "InconsistentData",
    "NonPositiveField",
    "NotConservative",
    "NotConverged",
    "ParseError",
    "ProfileDegenerate",
    "SolverSingular",
    "ValidationError",
    "FiberGrid",
    "ScalarField",
    "Topology",
    "VectorAlongFiber",
    "build_grid",
    "derivative",
    "divergence",
    "grad_log",
    "integrate",
    "laplacian",
    "__version__",
]
