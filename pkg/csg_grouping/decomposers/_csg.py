from dataclasses import dataclass, field, fields

import numpy as _np

from csg_grouping._constants import (
    STAGE_ADDITIVE,
    STAGE_MSVD,
    CLASS_ADDITIVE,
    CLASS_MULTIPLICATIVE,
    CLASS_COMPOSITE,
    CLASS_NONSEPARABLE,
    DEFAULT_ALPHA,
    DEFAULT_GSS_PRECISION,
    DEFAULT_HALVING_FACTOR,
    DEFAULT_EPS2_SCALE,
    DEFAULT_EPS2_FLOOR,
    MSVD_DEGENERATE_FLOOR
)
from csg_grouping._problem import GroupingResult, NonFiniteObjectiveError
from csg_grouping._debug import debug_print, debug_timer
from csg_grouping.decomposers._common import (
    eps1_threshold,
    eps2_threshold,
    evaluate_finite
)
from csg_grouping.decomposers._gss import gss_minimize, gss_iteration_bound
from csg_grouping.decomposers._min_shift import gsvd, nvg

THRESHOLD_ROUNDING = "rounding"


@dataclass
class CsgConfig:
    """
    Settings for csg_decompose.

    `eps_gss` is an absolute golden-section precision applied to every
    coordinate; when None, each coordinate uses `gss_precision` times its
    range. The initial minimum-shift probe is `alpha` times the range.
    Threshold policies are "rounding" (error-model thresholds) or a
    fixed positive float.
    """

    eps_gss: float = None
    gss_precision: float = DEFAULT_GSS_PRECISION
    alpha: float = DEFAULT_ALPHA
    halving_factor: float = DEFAULT_HALVING_FACTOR
    eps1_policy: object = THRESHOLD_ROUNDING
    eps2_policy: object = THRESHOLD_ROUNDING
    eps2_scale: float = DEFAULT_EPS2_SCALE
    eps2_floor: float = DEFAULT_EPS2_FLOOR
    gsvd_shrinking: bool = False
    nvg_seed: int = None

    @classmethod
    def from_dict(cls, overrides=None):
        """
        Build a config from a dict of field overrides

        :raises ValueError: On keys that are not config fields
        """

        overrides = {} if overrides is None else dict(overrides)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(overrides) - known)

        if unknown:
            raise ValueError(
                f"Unknown CSG config keys {unknown}; expected a subset of {sorted(known)}"
            )

        return cls(**overrides)

    def eps_vector(self, problem):
        if self.eps_gss is not None:
            return _np.full(problem.dimension, float(self.eps_gss))
        return self.gss_precision * problem.ranges

    def delta0_vector(self, problem):
        return self.alpha * problem.ranges

    @staticmethod
    def _check_policy(name, policy):
        if policy == THRESHOLD_ROUNDING:
            return
        elif isinstance(policy, (int, float)) and not isinstance(policy, bool) and policy > 0:
            return
        raise ValueError(
            f"{name} must be {THRESHOLD_ROUNDING!r} or a positive number; {policy!r} provided"
        )

    def validate(self, problem):
        """
        Check the config against the problem it will decompose

        :raises ValueError: On any invalid setting
        """

        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1); {self.alpha} provided")
        elif not 0 < self.halving_factor < 1:
            raise ValueError(
                f"halving_factor must be in (0, 1); {self.halving_factor} provided"
            )
        elif self.eps_gss is None and not 0 < self.gss_precision < 1:
            raise ValueError(
                f"gss_precision must be in (0, 1); {self.gss_precision} provided"
            )
        elif self.eps_gss is not None and self.eps_gss <= 0:
            raise ValueError(f"eps_gss must be positive; {self.eps_gss} provided")
        elif self.eps2_scale <= 0 or self.eps2_floor < 0:
            raise ValueError("eps2_scale must be positive and eps2_floor non-negative")

        self._check_policy("eps1_policy", self.eps1_policy)
        self._check_policy("eps2_policy", self.eps2_policy)

        eps = self.eps_vector(problem)

        if _np.any(eps >= problem.ranges):
            raise ValueError(
                f"eps_gss must be below every variable range; "
                f"min range is {problem.ranges.min()}"
            )
        elif _np.any(eps >= self.delta0_vector(problem)):
            raise ValueError(
                "The golden section precision must be below the initial probe "
                "step alpha * (ub - lb) for every variable"
            )

        return True


class ContextArchive:
    """
    Rolling context vector `cv` and one archived context row per variable.
    Every row starts at the box midpoint.
    """

    def __init__(self, cv, c_arc):
        self.cv = cv
        self.c_arc = c_arc

    @classmethod
    def from_bounds(cls, problem):
        mid = problem.midpoint
        return cls(mid.copy(), _np.tile(mid, (problem.dimension, 1)))

    def record(self, i):
        self.c_arc[i, :] = self.cv

    def row(self, i):
        return self.c_arc[i, :].copy()


@dataclass
class AdditiveCheck:
    beta1: float
    eps1: float
    points: dict = field(repr=False)
    values: dict = field(repr=False)

    @property
    def additive(self):
        return self.beta1 < self.eps1


@dataclass
class MsvdCheck:
    beta2: float
    eps2: float
    degenerate: bool = False

    @property
    def multiplicative(self):
        return not self.degenerate and self.beta2 < self.eps2


def _corner_points(problem, i):
    lb, ub = problem.lower_bounds, problem.upper_bounds

    ul = lb.copy()
    ul[i] = ub[i]
    lu = ub.copy()
    lu[i] = lb[i]

    return {"ll": lb.copy(), "ul": ul, "lu": lu, "uu": ub.copy()}


def additive_check(problem, i, f_ll, f_uu, config=None):
    """
    Four-corner additivity test for variable `i`. Evaluates two new
    points, reusing the all-lower and all-upper values.

    :param problem: Problem being decomposed
    :type problem: ObjectiveProblem
    :param i: Variable index
    :type i: int
    :param f_ll: Objective at the lower-bound vector
    :type f_ll: float
    :param f_uu: Objective at the upper-bound vector
    :type f_uu: float
    :param config: Threshold settings, defaults to CsgConfig()
    :type config: CsgConfig, optional
    :return: beta1, its threshold, and the four corners with values
    :rtype: AdditiveCheck
    """

    config = CsgConfig() if config is None else config
    points = _corner_points(problem, i)

    values = {
        "ll": f_ll,
        "ul": evaluate_finite(problem, points["ul"], STAGE_ADDITIVE),
        "lu": evaluate_finite(problem, points["lu"], STAGE_ADDITIVE),
        "uu": f_uu
    }

    delta1 = values["ul"] - values["ll"]
    delta2 = values["uu"] - values["lu"]
    beta1 = abs(delta1 - delta2)

    if config.eps1_policy == THRESHOLD_ROUNDING:
        eps1 = eps1_threshold(list(values.values()), problem.dimension)
    else:
        eps1 = float(config.eps1_policy)

    return AdditiveCheck(beta1, eps1, points, values)


def _in_box(problem, point):
    return bool(_np.all(point >= problem.lower_bounds) and _np.all(point <= problem.upper_bounds))


def msvd(problem, i, corners, config=None):
    """
    Multiplicative separability test for variable `i`. Evaluates the
    four corners with coordinate i scaled by the halving factor.

    :param problem: Problem being decomposed
    :type problem: ObjectiveProblem
    :param i: Variable index
    :type i: int
    :param corners: Corner points and values from additive_check
    :type corners: AdditiveCheck
    :param config: Settings, defaults to CsgConfig()
    :type config: CsgConfig, optional
    :return: beta2 and its threshold
    :rtype: MsvdCheck
    """

    config = CsgConfig() if config is None else config
    keys = ("ll", "ul", "lu", "uu")

    f = _np.array([corners.values[k] for k in keys])
    f_primed = _np.empty(4)
    finite = True

    for j, k in enumerate(keys):
        point = corners.points[k].copy()
        point[i] *= config.halving_factor

        with _np.errstate(all="ignore"):
            f_primed[j] = problem.evaluate(point, STAGE_MSVD)

        if not _np.isfinite(f_primed[j]):
            if _in_box(problem, point):
                raise NonFiniteObjectiveError(
                    f"Objective returned {f_primed[j]} at an in-box MSVD point of variable {i}"
                )
            finite = False

    differences = f - f_primed

    if not finite or _np.any(_np.abs(differences) < MSVD_DEGENERATE_FLOOR):
        return MsvdCheck(_np.inf, config.eps2_floor, degenerate=True)

    log_abs = _np.log(_np.abs(differences))
    delta1 = log_abs[0] - log_abs[1]
    delta2 = log_abs[2] - log_abs[3]
    beta2 = float(abs(delta1 - delta2))

    if config.eps2_policy == THRESHOLD_ROUNDING:
        eps2 = eps2_threshold(
            delta1,
            delta2,
            f,
            f_primed,
            differences,
            problem.dimension,
            scale=config.eps2_scale,
            floor=config.eps2_floor
        )
    else:
        eps2 = float(config.eps2_policy)

    return MsvdCheck(beta2, eps2)


def csg_decompose(problem, config=None, trace=None):
    """
    Composite separability grouping.

    Variables are scanned in reverse index order. Each one is tested for
    additive and then multiplicative separability; the rest get an
    independent minimum by golden section search against the rolling
    context vector. The minimum-shift stages then split those into
    generally separable variables and non-separable groups.

    :param problem: Problem to decompose. Evaluations are charged to its ledger.
    :type problem: ObjectiveProblem
    :param config: Settings, defaults to CsgConfig()
    :type config: CsgConfig, optional
    :param trace: If a list is passed, one dict per variable is appended
        describing how it was classified
    :type trace: list, optional
    :return: Grouping and the problem's ledger
    :rtype: tuple(GroupingResult, FeLedger)
    """

    config = CsgConfig() if config is None else config
    config.validate(problem)

    t0 = debug_timer()

    n = problem.dimension
    eps = config.eps_vector(problem)
    delta0 = config.delta0_vector(problem)
    archive = ContextArchive.from_bounds(problem)

    f_ll = evaluate_finite(problem, problem.lower_bounds.copy(), STAGE_ADDITIVE)
    f_uu = evaluate_finite(problem, problem.upper_bounds.copy(), STAGE_ADDITIVE)

    s1, s2, pending = [], [], []
    records = {}

    for i in reversed(range(n)):

        add = additive_check(problem, i, f_ll, f_uu, config)
        record = {"variable": i, "beta1": add.beta1, "eps1": add.eps1}
        records[i] = record

        if add.additive:
            s1.append(i)
            record.update(stage="additive", cls=CLASS_ADDITIVE)
            continue

        mult = msvd(problem, i, add, config)
        record.update(beta2=mult.beta2, eps2=mult.eps2)

        if mult.multiplicative:
            s2.append(i)
            record.update(stage="msvd", cls=CLASS_MULTIPLICATIVE)
            continue

        archive.cv[i] = gss_minimize(problem, i, archive.cv, eps[i])
        archive.record(i)
        pending.append(i)
        record.update(stage="gss", minimum=float(archive.cv[i]))

    t0 = debug_timer(f"CSG additive, MSVD and search stages ({n} variables)", t0)

    s3 = gsvd(
        problem,
        pending,
        archive,
        delta0,
        shrinking=config.gsvd_shrinking
    )

    composite = set(s3)
    nonseparable = [v for v in pending if v not in composite]

    groups = nvg(problem, nonseparable, archive, delta0, seed=config.nvg_seed)

    debug_timer("CSG minimum-shift stages", t0)

    for v in pending:
        records[v]["cls"] = CLASS_COMPOSITE if v in composite else CLASS_NONSEPARABLE

    if trace is not None:
        trace.extend(records[i] for i in reversed(range(n)))

    debug_print(
        f"CSG: {len(s1)} additive, {len(s2)} multiplicative, {len(s3)} composite, "
        f"{len(groups)} non-separable group(s); {problem.ledger.total} evaluations"
    )

    return GroupingResult(s1, s2, s3, groups), problem.ledger


def detection_fe_model(dimension, n_additive, n_multiplicative, gss_evaluations=None):
    """
    Predicted evaluation counts per detection stage.

    The GSVD figure is a lower bound (three evaluations per variable
    reaching it). `gss_evaluations` is the per-variable search cost and
    defaults to the worst case for the default precision.

    :param dimension: Number of variables n
    :type dimension: int
    :param n_additive: Number of additively separable variables p
    :type n_additive: int
    :param n_multiplicative: Number of multiplicatively separable variables q
    :type n_multiplicative: int
    :param gss_evaluations: Search evaluations per variable, optional
    :type gss_evaluations: int
    :return: Stage name to predicted count
    :rtype: dict
    """

    if n_additive + n_multiplicative > dimension:
        raise ValueError(
            f"{n_additive} additive + {n_multiplicative} multiplicative variables "
            f"exceed the dimension {dimension}"
        )

    if gss_evaluations is None:
        gss_evaluations = gss_iteration_bound(1.0, DEFAULT_GSS_PRECISION) + 2

    searched = dimension - n_additive - n_multiplicative

    return {
        "additive_stage": 2 * dimension + 2,
        "msvd_stage": 4 * (dimension - n_additive),
        "gss_stage": gss_evaluations * searched,
        "gsvd_stage": 3 * searched
    }
