"""Solvability certificates for distribution-system power flow.

The main entry points are :func:`certify_hull` with :func:`rhombus`, the
norm criteria :func:`certify_base` / :func:`certify_rescaled`, the
fixed-point solver :func:`solve_fixed_point`, and the boundary tracers in
:mod:`gridcert.boundary`.
"""

__version__ = "0.1.0"

from .boundary import (
    BoundarySample,
    LambdaUnion,
    LoadPattern,
    PVCurve,
    RaySpec,
    certificate_t_star,
    lambda_union_samples,
    oracle_batch,
    oracle_t_star,
    pv_curve,
    sweep_boundary,
)
from .certificates import (
    CertificateVerdict,
    Rhombus,
    certify_all,
    certify_base,
    certify_hull,
    certify_rescaled,
    lambda_grid,
    nuclear_norm_2,
    nuclear_norm_inf,
    rhombus,
)
from .estimators import FixedPointPowerFlow, SolvabilityCertifier
from .netmodel import (
    Bus,
    ImpedanceMatrix,
    Line,
    Network,
    NetworkError,
    build_admittance,
    consumption_to_injection,
    impedance_submatrix,
    load_network,
    parse_network,
)
from .pfsolver import FixedPointState, PFSolution, apply_map, pf_residual, solve_fixed_point
from .svg import render_svg

__all__ = [
    "__version__",
    "BoundarySample",
    "LambdaUnion",
    "LoadPattern",
    "PVCurve",
    "RaySpec",
    "certificate_t_star",
    "lambda_union_samples",
    "oracle_batch",
    "oracle_t_star",
    "pv_curve",
    "sweep_boundary",
    "CertificateVerdict",
    "Rhombus",
    "certify_all",
    "certify_base",
    "certify_hull",
    "certify_rescaled",
    "lambda_grid",
    "nuclear_norm_2",
    "nuclear_norm_inf",
    "rhombus",
    "Bus",
    "ImpedanceMatrix",
    "Line",
    "Network",
    "NetworkError",
    "build_admittance",
    "consumption_to_injection",
    "impedance_submatrix",
    "load_network",
    "parse_network",
    "FixedPointPowerFlow",
    "SolvabilityCertifier",
    "FixedPointState",
    "PFSolution",
    "apply_map",
    "pf_residual",
    "solve_fixed_point",
    "render_svg",
]
