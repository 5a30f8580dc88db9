"""Bounded harmonic functions and the Dirichlet problem at infinity on warped ends.

The package is organised around five layers:

``expr``
    warp-function expressions (parser, symbolic derivatives, evaluation);
``geometry``
    ends ``N x [r0, oo)`` with metric ``dr^2 + phi^2 g_N``, curvature and Laplacian;
``criteria``
    the comparison-warp solvability test, tail integrals, Sturm comparison;
``barriers``
    explicit local barriers at points at infinity and their discrete audit;
``solver``
    finite-difference exhaustion solves of the Dirichlet problem at infinity.
"""
from .expr import (ArityError, DomainError, UnknownIdentifierError, WarpError, WarpExpr,
                   WarpField, WarpSyntaxError, differentiate, evaluate, parse_warp, serialize)
from .geometry import (CrossSection, CurvatureProfile, EndSpec, ExpansivenessError,
                       LaplacianCoefficients, christoffel_curvature_oracle, curvature_sign_profile,
                       laplacian_coefficients, radial_sectional_curvature)
from .criteria import (ComparisonWarp, CriterionReport, CurvatureBoundError, SampleGrid,
                       SturmResult, TailVerdict, check_criterion, comparison_warp,
                       hyperbolic_comparison_warp, sturm_compare, tail_integral)
from .barriers import (AuditGrid, AuditReport, Barrier, CapChart, CapEigenfunction, SigmaProfile,
                       audit_refinement, audit_superharmonic, barrier_2d, build_barrier,
                       cap_eigenfunction, conformal_rescale, sigma_profile)
from .solver import (DiscreteProblem, ManifoldConfig, MaximumPrincipleError, Resolution,
                     SolveError, SolveResult, WitnessResult, assemble, exhaust, exhaust_ends,
                     liouville_witness, probe_values, radial_mode_oracle, residual_norm, solve,
                     solve_config, two_end_mode_oracle)

__version__ = "0.1.0"
