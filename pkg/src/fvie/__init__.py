"""Collocation and Picard solvers for 2-D fuzzy Volterra integral equations
with piecewise kernels."""

from .collocation import (CollocationConfig, Solution, assemble_linear, convergence_study,
                          discrete_residual, node_error, reconstruct, solve, solve_linear,
                          solve_nonlinear)
from .errors import *  # noqa: F401,F403
from .fuzzy import (FuzzyNumber, LevelGrid, crisp, fuzzy_add, fuzzy_equal, fuzzy_scale,
                    hausdorff_distance, triangular, validate)
from .interpolation import FuzzyGrid, LagrangeBasis, interp_2d
from .picard import (PicardConfig, PicardTrace, apriori_bound, gronwall_check, picard_solve,
                     sup_distance, tail_bound, verify_contraction)
from .problems import (Breakpoints, Nonlinearity, PiecewiseKernel, ProblemSpec,
                       estimate_kernel_sup, registry_get, registry_names)
from .quadrature import chebyshev_nodes, fuzzy_quad_2d, gauss_legendre

__version__ = "0.1.0"
