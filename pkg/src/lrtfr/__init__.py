"""Low-rank tensor function representation.

A tensor function ``f(x, y, z) = C x1 f_x(x) x2 f_y(y) x3 f_z(z)`` is stored
as a small core tensor plus three bias-free sine MLPs, one per axis.
Sampling it on any coordinate grid yields a tensor whose Tucker rank is at
most the core dims.
"""

from .errors import (
    ContractError,
    DimensionError,
    DomainError,
    FormatError,
    LrtfrError,
    NumericalError,
    UnsupportedConfigurationError,
)
from .metrics import MetricReport, ara_aca, chamfer, f_score, nrmse, psnr, ssim
from .mlp import Mlp, entrywise_l1_max, init_mlp, lipschitz_budget
from .model import CoordinateGrid, LrtfrModel, evenly_spaced, index_grid, init_model
from .optim import (
    TASK_WEIGHT_DECAY,
    AdamState,
    FitConfig,
    adam_step,
    complete,
    fit_denoising,
    fit_inpainting,
    fit_sdf,
)
from .search import grid_search
from .tasks import (
    HpoGrid,
    PointCloud,
    Recommendation,
    dense_scan,
    denoise,
    hpo_complete,
    inpaint,
    upsample_pointcloud,
)
from .tensor import (
    fold,
    frobenius_norm,
    l1_norm,
    mode_product,
    numerical_tucker_rank,
    soft_threshold,
    tucker_product,
    tv_seminorm,
    unfold,
)
from .verify import (
    discretize_as_tensor_function,
    gradient_check,
    verify_lipschitz,
    verify_rank_bound,
)

__version__ = "0.1.0"
