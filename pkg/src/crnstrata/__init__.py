"""Global stability certificates for complex balanced mass-action networks.

Siphon faces are excluded as omega-limit sets by finding linear
functionals that decrease inside every stratum touching the face; all
feasibility questions are decided in exact rational arithmetic.
"""

from .certify import (
    StabilityCertificate,
    build_partial_sum_set,
    certify_global_stability,
    check_condition1,
    check_condition2,
)
from .equilibrium import (
    ConvergenceError,
    NoPositiveKernel,
    NotComplexBalanced,
    complex_potential,
    find_equilibrium,
    project_to_class,
)
from .geometry import (
    ScaleError,
    enumerate_adjacent_orderings,
    enumerate_siphons,
    face_adjacent,
    stratum_nonempty,
)
from .graph import (
    cycle_decomposition,
    deficiency,
    flux_matrix,
    is_weakly_reversible,
    linkage_classes,
)
from .network import (
    ParseError,
    ReactionNetwork,
    conserved_quantities,
    load_network,
    mass_action_rhs,
    parse_network,
    serialize_network,
    stoichiometric_subspace,
)
from .ratlp import LinearConstraint, solve_feasibility, solve_strict_direction
from .simulate import StiffnessError, integrate, locate_stratum, lyapunov, monitor

__version__ = "0.1.0"


def example_path(name: str):
    """Path of a bundled network file, e.g. ``example_path("example1")``."""
    from importlib.resources import files

    return files(__name__) / "data" / f"{name}.crn"
