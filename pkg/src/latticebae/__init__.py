"""Boundary algebraic equations for the unfitted difference Laplacian.

A solver library for the 2-D Poisson problem -lap(u) = f on domains
described implicitly by a level-set function, discretized with the
classical 5-point stencil on a regular lattice that does not fit the
boundary.  The discrete solution is represented by single- or
double-layer lattice potentials whose densities live on a thin layer of
exterior grid nodes; boundary conditions enter through local polynomial
interpolation on cut cells, and interior values are recovered either by
direct kernel summation or by an FFT-accelerated difference-potential
solve on an auxiliary box.
"""

from .errors import (
    AssemblyError,
    BoxTooSmallError,
    ClosureDegeneracyError,
    ConfigError,
    DegenerateDomainError,
    DoubleLayerInapplicableError,
    ExtrapolationStencilError,
    FormulationSingularError,
    GeometryError,
    GeometryTooTightError,
    InconsistentClassificationError,
    LatticeBaeError,
    QuadratureError,
    SingularSystemError,
    UnderResolvedBoundaryError,
)
from .lgf import (
    E1,
    E2,
    R_SWITCH,
    LatticeIndex,
    LgfTable,
    canonical_index,
    lgf,
    lgf_asymptotic,
    lgf_grid,
    lgf_quadrature,
    lgf_recursion_table,
    warm,
)
from .geometry import (
    Grid,
    IntersectionPoint,
    LevelSetShape,
    PointSets,
    circle_exterior,
    classify,
    diamond,
    ellipse,
    select_intersections,
)
from .potentials import (
    DensityVector,
    LayerKind,
    LayerMatrix,
    TraceVector,
    assemble_layer_matrix,
    evaluate_potential,
)
from .closure import (
    BoundaryCondition,
    ClosureMatrices,
    SupportCell,
    assemble_closure,
    build_support_cells,
    dirichlet,
    neumann,
    robin,
)
from .solver import (
    Formulation,
    SolveResult,
    SystemForm,
    assemble_system,
    build_layer_matrices,
    condition_number,
    dense_solve,
    formulation_from_tag,
    solve_system,
)
from .diffpot import (
    AuxiliaryBox,
    GridFunction,
    correct_boundary_rhs,
    difference_potential,
    fft_poisson_solve,
    particular_solution,
    superpose,
)
from .harness import (
    ConditioningReport,
    ConvergenceReport,
    ExperimentConfig,
    ResultRow,
    run_conditioning,
    run_convergence,
    run_solve,
    solve_problem,
)

__version__ = "0.1.0"
