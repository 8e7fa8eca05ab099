"""Regularized minimal-norm solutions of overdetermined systems of
first-kind Fredholm integral equations with boundary constraints.

The solver collocates the equations, represents each collocation functional
in a reproducing-kernel Hilbert space of functions with square-integrable
second derivative, and expands the minimal-norm solution in those
representers.  The resulting symmetric system is regularized by truncating
its eigendecomposition, with the truncation index chosen by the discrepancy
principle, an L-curve corner search, or an error-minimizing oracle.
"""

from .errors import (
    DegenerateProblemError,
    InsufficientCurveError,
    NonFiniteIntegrandError,
    QuadratureError,
    RieszRegError,
)
from .quadrature import (
    IntegrationConfig,
    PanelGrid,
    QuadratureRule,
    gauss_legendre_rule,
    integrate,
    integrate_with_breakpoints,
)
from .rkhs import (
    BoundaryValues,
    Interval,
    boundary_lift,
    kernel_pair_integral,
    reproduce_value,
    reproducing_kernel_second,
    reproducing_kernel_value,
    shift_rhs,
)
from .riesz import ProblemSpec, RieszBasis, build_basis, representer_second, representer_value
from .gram import GramFactorization, assemble_gram, positivity_cutoff, spectral_factorize
from .solver import (
    DataVector,
    RegularizedSolution,
    apply_forward,
    coefficients_full,
    coefficients_teig,
    coefficients_teig_pinv,
    evaluate_solution,
    orthonormal_function,
    residual_norm,
    solution_sweep,
    solve_at,
    w_norm,
    w_norm_quadratic,
)
from .regparam import (
    CornerResult,
    LCurve,
    NoiseModel,
    ParamSelectionReport,
    add_noise,
    discrepancy_kappa,
    kappa_best,
    lcurve_corner,
    lcurve_points,
    select_parameters,
    standard_normals,
)
from .problems import (
    FdemConfig,
    GalerkinBaseline,
    TruthProfile,
    build_problem,
    fdem_problem,
    galerkin_baseline,
    problem_names,
    test_problem_1,
    test_problem_2,
    truth_profile,
)

__version__ = "0.1.0"
