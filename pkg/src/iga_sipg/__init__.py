"""Multipatch isogeometric discretization of piecewise-constant-coefficient
Poisson problems, coupled across patches by symmetric interior penalties."""

from .analysis import (
    ErrorReport,
    Projector1D,
    convergence_rates,
    error_vs_exact,
    project_1d,
    project_field,
    project_patch,
)
from .assembly import (
    SipgParameters,
    SparseSymmetricMatrix,
    assemble_consistency,
    assemble_load,
    assemble_matrix,
    assemble_penalty,
    assemble_qh_gram,
    assemble_system,
    assemble_volume,
    read_triplets,
)
from .domains import BUILTIN_DOMAINS, builtin_domain
from .exceptions import (
    ConfigurationError,
    DomainError,
    GeometryError,
    IgaError,
    InversionError,
    RateError,
    SolverError,
    TopologyError,
)
from .geometry import GeometryMap, edge_normal, estimate_regularity, invert_point
from .quadrature import element_rule, gauss_rule, interface_rule
from .solutions import BUILTIN_SOLUTIONS, ManufacturedSolution, builtin_solution
from .solver import SolverSettings, extremal_rayleigh, solve
from .space import DgSpace, DiscreteField, build_space, eval_field, interpolate_boundary
from .splines import (
    SplineSpace1D,
    TensorSplineSpace,
    boundary_trace_indices,
    eval_basis,
    eval_tensor_basis,
)
from .study import StudyConfig, run_study, solve_manufactured
from .topology import (
    Interface,
    MultiPatchDomain,
    Patch,
    alpha_max,
    discover_interfaces,
    global_mesh_quantities,
)

__version__ = "0.1.0"
