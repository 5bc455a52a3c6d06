"""Online and offline profit maximization with convex production costs in
the random-order model."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .classifiers import (
    Classifier,
    PickReport,
    curve_point,
    find_good_classifier,
    pick,
)
from .costs import (
    CostModel,
    CustomCost,
    SeparableExpCost,
    SeparablePowerCost,
    SupermodularQuadraticCost,
    TruncatedCost,
    check_supermodular,
    cost_from_dict,
    separable_surrogate,
    truncate_gradient,
)
from .errors import (
    ConvexProfitError,
    CurveRangeExceeded,
    InvalidCost,
    NoGoodClassifier,
    RequiresSeparable,
    TooLarge,
)
from .instances import (
    GeneratorConfig,
    Instance,
    Item,
    PreprocessConfig,
    canonical_instance,
    detect_exceptional,
    generate,
    instance_from_dict,
    perturb_general_position,
    split_exceptional,
)
from .matroids import (
    FractionalSolution,
    FreeMatroid,
    PartitionMatroid,
    UniformMatroid,
    fopt,
    greedy_max_weight,
    matroid_from_dict,
)
from .offline import (
    OfflineSolution,
    PiPlus,
    build_pi_plus,
    solve_constrained,
    solve_unconstrained,
    x_lin,
)
from .online import (
    OnlineConfig,
    OnlineRun,
    SubmodMSConfig,
    learn_threshold,
    lovasz_extension,
    reduce_supermodular_to_separable,
    run_algorithm1,
    run_with_preprocessing,
    single_secretary,
    submod_ms,
)
from .oracles import (
    OracleResult,
    best_filtered_feasible,
    brute_force_fopt,
    brute_force_opt,
)

__version__ = "0.1.0"
