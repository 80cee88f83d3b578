"""Geodesic flows, first integrals and integrability checks on 2-step
nilpotent Lie groups, with the Heisenberg group as the main model."""

from .algebra import (
    Algebra2Step,
    ad_transpose,
    bracket,
    heisenberg_algebra,
    is_nonsingular,
    j_apply,
    j_of,
    load_algebra,
    standard_J,
)
from .errors import ConfigError, NumericError
from .flow import (
    Trajectory,
    conservation_report,
    exact_fiber_solution,
    geodesic_field,
    integrate,
    rank_check,
    sample_states,
)
from .group import HeisenbergGroup, frame, mul
from .heisenberg import PMetricSpec, build_P_metric, canonical_families, f_Z1
from .integrals import (
    Energy,
    FirstIntegral,
    KillingRotation,
    KillingTranslation,
    LinearCentral,
    Quadratic,
    butler_predicate,
)
from .lattice import LatticeSpec, SmoothedKilling, contains, quotient_family
from .symplectic import (
    TangentPair,
    TangentState,
    first_integral_residual,
    grad_to_hamiltonian,
    numeric_gradient,
    omega,
    poisson,
)

__version__ = "0.1.0"

__all__ = [
    "Algebra2Step",
    "ConfigError",
    "Energy",
    "FirstIntegral",
    "HeisenbergGroup",
    "KillingRotation",
    "KillingTranslation",
    "LatticeSpec",
    "LinearCentral",
    "NumericError",
    "PMetricSpec",
    "Quadratic",
    "SmoothedKilling",
    "TangentPair",
    "TangentState",
    "Trajectory",
    "ad_transpose",
    "bracket",
    "build_P_metric",
    "butler_predicate",
    "canonical_families",
    "conservation_report",
    "contains",
    "exact_fiber_solution",
    "f_Z1",
    "first_integral_residual",
    "frame",
    "geodesic_field",
    "grad_to_hamiltonian",
    "heisenberg_algebra",
    "integrate",
    "is_nonsingular",
    "j_apply",
    "j_of",
    "load_algebra",
    "mul",
    "numeric_gradient",
    "omega",
    "poisson",
    "quotient_family",
    "rank_check",
    "sample_states",
    "standard_J",
]
