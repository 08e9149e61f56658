"""Hamiltonian mechanics on cotangent bundles in moving frames.

Quasi-momenta, the non-Darboux symplectic and Poisson matrices with their
E-block, Lie-Poisson reduction, principal bundle blocks, and nonholonomic
dynamics on the constraint surface, checked against a direct
Lagrange-multiplier oracle.
"""

from .errors import (
    ConfigError,
    EvaluationFailure,
    IncompatibleTrajectories,
    InconsistentInitialData,
    MovingFrameError,
    NoConvergence,
    NumericalFailure,
    SingularConstraintMetric,
    SingularFrame,
    SingularHessian,
    StepFailure,
)
from .frames import (
    Chart,
    FrameField,
    StructureFunctions,
    VectorFieldHandle,
    builtin_frames,
    eval_frame,
    frame_derivative,
    heisenberg_frame,
    identity_frame,
    lie_bracket,
    rolling_disk_frame,
    shear_frame,
    sleigh_frame,
    so3_euler_frame,
    structure_functions,
)
from .cotangent import (
    HamiltonianHandle,
    PhaseState,
    QuadraticHamiltonian,
    coframe_matrix,
    dH_decompose,
    e_matrix,
    earnest_dictionary,
    lambda_matrix,
    poisson_matrix,
    spiritual_component,
    symplectic_matrix,
    to_quasi,
    to_standard,
)
from .lie_poisson import (
    LieAlgebraData,
    e_matrix_left,
    e_matrix_right,
    kaks_pairing,
    lie_poisson_bracket,
    lie_poisson_field,
    rigid_body_field,
    so3,
)
from .bundles import (
    ConnectionData,
    assemble_bundle_e,
    builtin_bundles,
    curvature,
    horizontal_lift,
    jk_block,
    mixed_block,
    vertical_block,
)
from .nonholonomic import (
    ConstraintSplit,
    ReducedPoisson,
    almost_casimir_check,
    constrained_field,
    dalembert_field,
    multipliers,
    reduced_poisson,
    solve_constraint_surface,
)
from .harness import OracleSystem, Trajectory, compare, integrate, monitor, oracle_direct
from .scenarios import REGISTRY, build_scenario

__version__ = "0.1.0"
