"""Exact and numerical checks for gluing catenoidal ends onto a minimal surface."""

from .complex_algebra import Polynomial, RationalFunction, RootSet, partial_fractions, poly_roots
from .equations import ParameterVector, ResidualVector, full_residual, label_zeros
from .forms import INFINITY, Circle, MeromorphicForm, Polyline, Segment, circle_period, path_integral
from .gluing import (
    GluedComponents,
    GluingConfiguration,
    build_components,
    central_configuration,
    growth_vector,
    level_curves,
    limit_graph,
    node_transition,
)
from .hurwitz import CoveringLocalModel, branching_profile, isomorphic_profiles, same_branching_values
from .jacobian import build_matrix_A, certify_matrix_A, jacobian_at_central
from .tower import GrowthState, Schedule, asymptotics, step, validate_schedule
from .weierstrass import WeierstrassData, catenoid, dimension_audit, gauss_curvature, immerse, mesh_surface

__version__ = "0.1.0"
