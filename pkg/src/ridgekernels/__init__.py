"""Ridge-function Mercer kernel machines.

Random-feature ridge kernels, shift-invariant kernel approximation, PSD and
frame certification, kernel ridge regression with a closed-form QR loss and
its truncated Neumann-series criterion, quasi-Newton feature optimization,
an exact polynomial engine for ridge-product membership tests, and a
one-vs-rest classification pipeline with a CLI.
"""

from .activations import COSINE, RELU, Activation, get_activation, register_activation
from .dataset import Dataset, ParseError, StandardizeStats, iris_path, load_csv, standardize
from .kernels import (
    ThetaParams,
    cross_gram,
    eval_kernel,
    feature_matrix,
    gram,
    theta_from_text,
    theta_to_text,
)
from .krr import (
    FittedModel,
    NeumannDivergenceError,
    RegularizedProblem,
    RidgeKernelRegressor,
    SingularMatrixError,
    closed_form_loss,
    direct_loss,
    fit,
    householder_solve,
    model_from_text,
    model_to_text,
    neumann_loss,
    predict,
    predict_batch,
    spectral_norm,
)
from .mercer import (
    SignedFeatureModel,
    frame_condition,
    is_psd_on_sample,
    jacobi_eigh,
    min_eigenvalue_sym,
)
from .optim import (
    MinimizeResult,
    OptimConfig,
    init_theta,
    lbfgs,
    minimize,
    minimize_multistart,
    objective,
    pack_theta,
    unpack_theta,
)
from .pipeline import (
    OneVsRestRidgeClassifier,
    OvrModel,
    PCAResult,
    TrainedPipeline,
    accuracy,
    classify,
    classify_batch,
    pca,
    run_experiment,
    train_ovr,
)
from .ridgepoly import (
    MPoly,
    apply_diff,
    enumerate_delta,
    in_closure_homogeneous,
    parse_mpoly,
    vanishes_on_L,
    vanishing_basis,
)
from .shift_approx import (
    ApproxConfig,
    CompactBox,
    GaussianKernel,
    RandomCosineFeatures,
    ShiftInvariantKernel,
    phase_average,
    phase_discretize,
    sample_rff_theta,
    sup_error,
)

__version__ = "0.1.0"
