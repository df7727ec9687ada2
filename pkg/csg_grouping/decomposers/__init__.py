from ._common import gamma, eps1_threshold, eps2_threshold
from ._gss import gss_minimize, gss_iteration_bound
from ._min_shift import gsvd, rgd, nvg
from ._csg import (
    CsgConfig,
    ContextArchive,
    AdditiveCheck,
    MsvdCheck,
    additive_check,
    msvd,
    csg_decompose,
    detection_fe_model
)
from ._baselines import (
    NonPositiveFitnessError,
    dg_pairwise,
    rdg_set_interact,
    rdg_like_decompose,
    ddg_pairwise_check,
    ddg_decompose
)
