"""FIR output-feedback controller synthesis via backward recursion."""

from slsdp._core import (
    InfeasibleError,
    Plant,
    QpSolution,
    ResidualReport,
    SolveResult,
    SystemResponse,
    UnboundedError,
    VectorizedSystem,
    build_vectorized,
    solve,
    solve_approx,
    solve_qp,
    stochastic_chain,
    verify_response,
)

__all__ = [
    "InfeasibleError",
    "Plant",
    "QpSolution",
    "ResidualReport",
    "SolveResult",
    "SystemResponse",
    "UnboundedError",
    "VectorizedSystem",
    "build_vectorized",
    "solve",
    "solve_approx",
    "solve_qp",
    "stochastic_chain",
    "verify_response",
]
