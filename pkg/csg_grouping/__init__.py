__version__ = '0.1.1'


from csg_grouping._debug import set_debug_mode, debug_print, debug_timer

from csg_grouping._problem import (
    FeLedger,
    ObjectiveProblem,
    GroupingResult,
    BudgetExhaustedError,
    NonFiniteObjectiveError,
    evaluate
)

from csg_grouping._metrics import sa, na, AccuracyReport

from .benchmarks import (
    make_basis,
    build_bms,
    random_rotation,
    fig1_example
)

from .decomposers import (
    CsgConfig,
    ContextArchive,
    csg_decompose,
    additive_check,
    msvd,
    gss_minimize,
    gsvd,
    nvg,
    rgd,
    detection_fe_model,
    dg_pairwise,
    rdg_set_interact,
    rdg_like_decompose,
    ddg_pairwise_check,
    ddg_decompose,
    NonPositiveFitnessError
)

from .optimizers import (
    SansdeConfig,
    partition_separables,
    random_subcomponents,
    sansde_generation,
    cc_optimize
)

from csg_grouping._experiment import (
    ExperimentManifest,
    ManifestError,
    load_manifest,
    manifest_from_dict,
    run_decomposition_suite,
    run_optimization_suite
)
