"""Expectations of a Levy process and its running maximum via Wiener-Hopf factorization."""

from .contours import (
    BromwichContour,
    DeformationError,
    DeformationReport,
    SinhContour,
    select_params,
    validate_deformation,
)
from .laplace import BromwichScheme, GwrScheme, gwr_shift, invert_gwr, invert_sinh_bromwich
from .models import (
    BrownianModel,
    KoBoLModel,
    LevyModel,
    RegularityProfile,
    brownian,
    calibrate_second_moment,
    kobol,
)
from .oracle import (
    OracleReport,
    bm_exchange_value,
    bm_joint_cdf,
    flat_contour_atom,
    flat_contour_cpdf_laplace,
    flat_contour_level_cdf_laplace,
    mc_extremum_transform,
    mc_joint_cdf,
)
from .pricers import (
    LaplaceScheme,
    LaplaceValue,
    PayoffSpec,
    PricingResult,
    PricingTask,
    barrier_laplace,
    cpdf_batch,
    cpdf_laplace,
    exchange_laplace,
    laplace_value_general,
    no_touch_laplace,
    price,
)
from .whf import WhfTable, build_table, decompose, phi_from_identity, phi_minus, phi_plus

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # models
    "LevyModel",
    "KoBoLModel",
    "BrownianModel",
    "RegularityProfile",
    "kobol",
    "brownian",
    "calibrate_second_moment",
    # contours
    "SinhContour",
    "BromwichContour",
    "DeformationError",
    "DeformationReport",
    "select_params",
    "validate_deformation",
    # factorization
    "WhfTable",
    "build_table",
    "decompose",
    "phi_plus",
    "phi_minus",
    "phi_from_identity",
    # Laplace inversion
    "GwrScheme",
    "BromwichScheme",
    "gwr_shift",
    "invert_gwr",
    "invert_sinh_bromwich",
    # pricing
    "LaplaceValue",
    "PayoffSpec",
    "LaplaceScheme",
    "PricingTask",
    "PricingResult",
    "cpdf_laplace",
    "no_touch_laplace",
    "barrier_laplace",
    "exchange_laplace",
    "laplace_value_general",
    "price",
    "cpdf_batch",
    # oracles
    "OracleReport",
    "bm_joint_cdf",
    "bm_exchange_value",
    "mc_joint_cdf",
    "mc_extremum_transform",
    "flat_contour_atom",
    "flat_contour_cpdf_laplace",
    "flat_contour_level_cdf_laplace",
]
