"""Identify the drift and noise intensity of a scalar SDE from its most probable path."""

from .design import DesignSystem, build_design, feature_matrix, feature_row, second_diff, split_rows
from .kernels import BACKEND
from .model import (
    B_LABELS,
    BASIS_NAMES,
    N_B,
    N_BETA,
    describe,
    drift_eval,
    el_rhs,
    om_lagrangian,
    structure_map,
)
from .recover import SENTINEL, RecoveredModel, findbeta0, findbeta1, hard_threshold
from .search import (
    CandidateRecord,
    ErrorBundle,
    HyperParams,
    error_bundle,
    grid_search,
    initial_estimate,
    inner_fixed_point,
    weight_grid,
    select_final,
    select_for_cell,
    threshold_search,
)
from .simulate import BoundaryConditions, Trajectory, integrate_ivp, shoot
from .solve import initial_ls, ridge_update

__version__ = "0.1.0"
