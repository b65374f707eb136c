"""Graph random features for implicitly defined graphs.

Vertices are points in R^d and edge weights come from a symmetric function
of coordinate differences, so the graph never has to be materialized. The
package provides the exact dense oracles (for testing), the classic
random-walk feature factorization, and its continuous-space relaxation
whose kernel action costs time linear in the number of vertices.
"""

from .action import (
    KernelAction,
    aggregate_deposits,
    build_kernel_action,
    matvec_k1,
    matvec_k2t,
    psi_map_for,
    swing_dense_kernel,
    swing_matvec,
)
from .errors import (
    ConvergenceError,
    DegenerateTransitionError,
    EmptySupportError,
    InvalidInputError,
    InvalidKernelError,
    MeshParseError,
    SwingError,
)
from .features import (
    FeatureSpec,
    FourierFeatureMap,
    PositiveFeatureMap,
    build_feature_map,
    fourier_kernel_estimate,
    importance_proposal,
    orthogonal_ensemble,
    positive_features,
    positive_kernel_estimate,
    sample_gaussian_fourier,
    sample_positive_features,
    sample_step_l1_fourier,
    step_l1_transform,
)
from .grf import (
    SignatureMatrix,
    WalkConfig,
    grf_factorize,
    grf_matvec,
    sample_signature_matrix,
    sample_signature_vector,
    sample_walk_lengths,
    signature_samples,
)
from .gumbel import (
    gumbel_max_select,
    relaxed_transition_coefficients,
    relaxed_transition_exact,
    sample_frechet,
    sample_gumbel,
    sample_point_factors,
    sample_walker_factors,
)
from .kernels import (
    Diffusion,
    DRegLaplacian,
    KernelSpec,
    Modulation,
    PStepRW,
    deconvolve_modulation,
    exact_kernel,
    fne,
)
from .pointcloud import PointCloud, load_point_cloud, save_point_cloud
from .walks import (
    LoadPrecompute,
    StepPrecompute,
    SwingConfig,
    Trajectories,
    build_step_precomputes,
    linearized_transition,
    relaxed_load_update,
    run_swing_walks,
)
from .weights import (
    GaussianRBF,
    StepL1,
    StepL2,
    degree_normalized,
    materialize_weights,
    weighted_degrees,
)

__version__ = "0.1.0"
