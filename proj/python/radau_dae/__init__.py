"""Python bindings for the radau_dae ADER-DG integrator."""

from ._core import (
    DomainError,
    InvalidArgument,
    NonConvergence,
    RadauDaeError,
    SingularMatrix,
    UnknownProblem,
    build_tables,
    convergence,
    elliptic_k,
    flame_exact,
    jacobi_sn_cn_dn,
    lambert_w,
    lambert_w_log,
    pendulum_exact,
    problems,
    radau_nodes,
    solve,
    stability_R,
)

__all__ = [
    "DomainError",
    "InvalidArgument",
    "NonConvergence",
    "RadauDaeError",
    "SingularMatrix",
    "UnknownProblem",
    "build_tables",
    "convergence",
    "elliptic_k",
    "flame_exact",
    "jacobi_sn_cn_dn",
    "lambert_w",
    "lambert_w_log",
    "pendulum_exact",
    "problems",
    "radau_nodes",
    "solve",
    "stability_R",
]

__version__ = "0.1.0"
