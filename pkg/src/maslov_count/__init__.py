"""Renormalized oscillation counts for linear Hamiltonian systems.

Counts spectral values of J y' = B(x; lambda) y on [0, 1] in a window
[lambda1, lambda2) as conjugate points of a pair of Lagrangian frame
paths, with separated or general self-adjoint boundary conditions,
independent finite-difference cross-checks, Maslov-box audits, and
spectral-curve export.
"""

__version__ = "0.1.0"

from .counting import SpectralCountReport, counting_function, renormalized_count
from .curves import CurveSet, export_curves, render_curves, scan_box
from .flow import (
    CrossingRecord,
    EigenphasePath,
    MaslovResult,
    UnitaryPath,
    crossing_direction,
    eigenphase_path,
    maslov_box_audit,
    maslov_index,
    rotated_direction,
)
from .frames import (
    LagrangianFrame,
    cayley_factor,
    grassmann_distance,
    intersection_projector,
    kernel_dim_at,
    orthogonal_projector,
    rotate_target,
    symplectic_j,
    validate_frame,
    w_pair,
)
from .oracle import OracleReport, fd_count, standard_maslov_count
from .propagation import (
    FramePath,
    FundamentalSolution,
    canonical_frames,
    fundamental_solution,
    integrate_frame,
)
from .systems import (
    DAEReduction,
    GeneralBC,
    HamiltonianSystem,
    SeparatedBC,
    check_assumptions,
    dae_essential_spectrum,
    double_system,
    make_block,
    make_dae,
    make_dirac,
    make_sturm_liouville,
    separated_to_general,
)

__all__ = [
    "__version__",
    "CrossingRecord",
    "CurveSet",
    "DAEReduction",
    "EigenphasePath",
    "FramePath",
    "FundamentalSolution",
    "GeneralBC",
    "HamiltonianSystem",
    "LagrangianFrame",
    "MaslovResult",
    "OracleReport",
    "SeparatedBC",
    "SpectralCountReport",
    "UnitaryPath",
    "canonical_frames",
    "cayley_factor",
    "check_assumptions",
    "counting_function",
    "crossing_direction",
    "dae_essential_spectrum",
    "double_system",
    "eigenphase_path",
    "export_curves",
    "fd_count",
    "fundamental_solution",
    "grassmann_distance",
    "integrate_frame",
    "intersection_projector",
    "kernel_dim_at",
    "make_block",
    "make_dae",
    "make_dirac",
    "make_sturm_liouville",
    "maslov_box_audit",
    "maslov_index",
    "orthogonal_projector",
    "render_curves",
    "renormalized_count",
    "rotate_target",
    "rotated_direction",
    "scan_box",
    "separated_to_general",
    "standard_maslov_count",
    "symplectic_j",
    "validate_frame",
    "w_pair",
]
