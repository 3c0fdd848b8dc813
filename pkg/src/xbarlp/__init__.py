"""LP solving on a simulated in-memory crossbar accelerator.

Public surface: problem types and ingestion, scaling, the accelerator
abstraction with exact and RRAM backends, Lanczos/power norm estimation,
the PDHG engine, and oracle engines for verification.
"""

__version__ = "0.1.0"

from .accel import (
    Backend,
    BoundedNoiseBackend,
    ExactBackend,
    MvmMode,
    SymBlock,
    build_sym_block,
    matmul_accel,
)
from .io import ParseError, load_problem, read_solution, write_solution
from .normest import (
    LanczosResult,
    derive_step_sizes,
    lanczos_svd,
    power_iteration_norm,
    tridiag_eigenvalues,
)
from .pdhg import (
    PdhgConfig,
    PdhgState,
    Residuals,
    Solution,
    compute_residuals,
    pdhg_iterate,
    pdhg_solve,
    project_box,
    write_trace,
)
from .problem import (
    LpProblem,
    ProblemError,
    SaddleProblem,
    StandardLp,
    recover_solution,
    saddle_problem,
    to_standard_form,
)
from .rram import (
    CapacityError,
    CrossbarArray,
    DeviceProfile,
    ProfileError,
    RramBackend,
    bundled_profile,
    encode,
    noisy_mvm,
    profile_from_file,
    quantization_bound,
)
from .scaling import ScalingInfo, diag_precond, ruiz_rescale, scale_bounds, scale_problem
from .telemetry import TelemetryLedger

__all__ = [
    "Backend",
    "BoundedNoiseBackend",
    "CapacityError",
    "CrossbarArray",
    "DeviceProfile",
    "ExactBackend",
    "LanczosResult",
    "LpProblem",
    "MvmMode",
    "ParseError",
    "PdhgConfig",
    "PdhgState",
    "ProblemError",
    "ProfileError",
    "Residuals",
    "RramBackend",
    "SaddleProblem",
    "ScalingInfo",
    "Solution",
    "StandardLp",
    "SymBlock",
    "TelemetryLedger",
    "build_sym_block",
    "bundled_profile",
    "compute_residuals",
    "derive_step_sizes",
    "diag_precond",
    "encode",
    "lanczos_svd",
    "load_problem",
    "matmul_accel",
    "noisy_mvm",
    "pdhg_iterate",
    "pdhg_solve",
    "power_iteration_norm",
    "profile_from_file",
    "project_box",
    "quantization_bound",
    "read_solution",
    "recover_solution",
    "ruiz_rescale",
    "saddle_problem",
    "scale_bounds",
    "scale_problem",
    "simplex_solve",
    "to_standard_form",
    "tridiag_eigenvalues",
    "write_solution",
    "write_trace",
]

from .oracle import (  # noqa: E402  (oracle depends on normest)
    OracleSolution,
    boxed_vertex_enumerate,
    dense_eig_max,
    dense_svd_max,
    simplex_solve,
    vertex_enumerate,
)
