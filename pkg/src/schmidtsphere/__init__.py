"""Reduced control systems on the Schmidt sphere of bipartite pure states."""

from .errors import (
    ConfigError,
    ConstraintError,
    DimensionError,
    EnumerationSizeError,
    InputError,
    KindError,
    NormalizationError,
    SchmidtError,
    SingularityError,
    UnitarityError,
)
from .factorizations import Regularity, complex_svd, hua, min_gap, regularity, takagi
from .fields import (
    CouplingHamiltonian,
    InducedField,
    StabilizationResult,
    induced_field,
    induced_field_bos,
    induced_field_dist,
    induced_field_ferm,
    speed_limit_bound,
    strong_stab_search,
    weyl_average,
)
from .lift import (
    EquivalenceReport,
    LocalHamiltonian,
    ad_apply,
    ad_pinv,
    ad_pinv_bos,
    ad_pinv_dist,
    ad_pinv_ferm,
    compensating_hamiltonian,
    equivalence_check,
    integrate_full,
    phase_distance,
)
from .reduced import (
    ControlSchedule,
    LocalControl,
    Trajectory,
    chamber_diameter,
    chamber_distance,
    control_time_lower_bound,
    integrate_lift,
    integrate_reduced,
    lie_rank,
    reach_sample,
)
from .states import (
    BipartiteState,
    Kind,
    SchmidtPoint,
    WeylElement,
    embed_diag,
    embed_qdiag,
    matrix_of_state,
    project_sigma,
    project_xi,
    sing_sorted,
    state_of_matrix,
    weyl_act,
    weyl_enumerate,
    weyl_sort,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteState",
    "ConfigError",
    "ConstraintError",
    "ControlSchedule",
    "CouplingHamiltonian",
    "DimensionError",
    "EnumerationSizeError",
    "EquivalenceReport",
    "InducedField",
    "InputError",
    "Kind",
    "KindError",
    "LocalControl",
    "LocalHamiltonian",
    "NormalizationError",
    "Regularity",
    "SchmidtError",
    "SchmidtPoint",
    "SingularityError",
    "StabilizationResult",
    "Trajectory",
    "UnitarityError",
    "WeylElement",
    "ad_apply",
    "ad_pinv",
    "ad_pinv_bos",
    "ad_pinv_dist",
    "ad_pinv_ferm",
    "chamber_diameter",
    "chamber_distance",
    "compensating_hamiltonian",
    "complex_svd",
    "control_time_lower_bound",
    "embed_diag",
    "embed_qdiag",
    "equivalence_check",
    "hua",
    "induced_field",
    "induced_field_bos",
    "induced_field_dist",
    "induced_field_ferm",
    "integrate_full",
    "integrate_lift",
    "integrate_reduced",
    "lie_rank",
    "matrix_of_state",
    "min_gap",
    "phase_distance",
    "project_sigma",
    "project_xi",
    "reach_sample",
    "regularity",
    "sing_sorted",
    "speed_limit_bound",
    "state_of_matrix",
    "strong_stab_search",
    "takagi",
    "weyl_act",
    "weyl_average",
    "weyl_enumerate",
    "weyl_sort",
]
