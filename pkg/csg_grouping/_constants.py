# Ledger stage tags
STAGE_ADDITIVE = "additive_stage"
STAGE_MSVD = "msvd_stage"
STAGE_GSS = "gss_stage"
STAGE_GSVD = "gsvd_stage"
STAGE_NVG = "nvg_stage"
STAGE_BASELINE = "baseline"
STAGE_OPTIMIZATION = "optimization"

STAGES = (
    STAGE_ADDITIVE,
    STAGE_MSVD,
    STAGE_GSS,
    STAGE_GSVD,
    STAGE_NVG,
    STAGE_BASELINE,
    STAGE_OPTIMIZATION
)

# Separability classes
CLASS_ADDITIVE = "additive"
CLASS_MULTIPLICATIVE = "multiplicative"
CLASS_COMPOSITE = "composite"
CLASS_NONSEPARABLE = "nonseparable"

SEPARABILITY_CLASSES = (
    CLASS_ADDITIVE,
    CLASS_MULTIPLICATIVE,
    CLASS_COMPOSITE,
    CLASS_NONSEPARABLE
)

# Unit roundoff of float64 (half machine epsilon)
UNIT_ROUNDOFF = 2.0 ** -53

# CSG defaults
DEFAULT_ALPHA = 1e-5
DEFAULT_GSS_PRECISION = 1e-8
DEFAULT_HALVING_FACTOR = 0.5
DEFAULT_EPS2_SCALE = 10.0
DEFAULT_EPS2_FLOOR = 1e-10
MSVD_DEGENERATE_FLOOR = 1e-300
PROBE_GROWTH = 10.0

# Benchmark box and block layout
BMS_LOWER_BOUND = -5.0
BMS_UPPER_BOUND = 5.0
BMS_BLOCK_SIZE = 50
BMS_FULL_SCALE_DIMENSION = 1000
BMS_COMPOSITE_SHIFT_FLOOR = 0.2
BMS_FUNCTION_IDS = tuple(range(1, 16))

# Cooperative co-evolution defaults
DEFAULT_POPULATION_SIZE = 50
DEFAULT_SUBCOMPONENT_CAP = 50
DEFAULT_LEARNING_PERIOD = 50
DEFAULT_CRM_PERIOD = 25

# Harness
METHOD_CSG = "csg"
METHOD_DG = "dg"
METHOD_RDG_LIKE = "rdg_like"
METHOD_DDG = "ddg"
METHOD_RANDOM = "random"

DECOMPOSITION_METHODS = (METHOD_CSG, METHOD_DG, METHOD_RDG_LIKE, METHOD_DDG)
OPTIMIZATION_METHODS = DECOMPOSITION_METHODS + (METHOD_RANDOM, )

DECOMPOSITION_COLUMNS = [
    "method",
    "function_id",
    "dimension",
    "seed",
    "sa",
    "na",
    "fe_additive",
    "fe_msvd",
    "fe_gss",
    "fe_gsvd",
    "fe_nvg",
    "fe_total"
]

OPTIMIZATION_COLUMNS = [
    "method",
    "function_id",
    "dimension",
    "run",
    "checkpoint_fe",
    "best_fitness"
]

SUMMARY_COLUMNS = [
    "method",
    "function_id",
    "dimension",
    "checkpoint_fe",
    "mean",
    "median",
    "std"
]

CSV_FLOAT_FORMAT = "%.5e"
