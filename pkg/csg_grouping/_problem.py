import json
import threading
from dataclasses import dataclass, field

import numpy as _np

from csg_grouping._constants import (
    STAGES,
    STAGE_ADDITIVE,
    STAGE_MSVD,
    STAGE_GSS,
    STAGE_GSVD,
    STAGE_NVG,
    STAGE_BASELINE,
    STAGE_OPTIMIZATION
)


class BudgetExhaustedError(RuntimeError):
    pass


class NonFiniteObjectiveError(RuntimeError):
    pass


def _stage_property(stage):
    return property(lambda self: self.count(stage), doc=f"Evaluations in {stage}")


class FeLedger:
    """
    Fitness-evaluation counter, one counter per stage.

    Counters only grow. When a budget is set, a charge that would take the
    total past it raises BudgetExhaustedError and leaves the counters alone.
    Charges are serialized with a lock so one ledger can be shared by
    threads.
    """

    def __init__(self, budget=None):

        if budget is not None and int(budget) < 1:
            raise ValueError(f"budget must be a positive integer; {budget} provided")

        self.budget = None if budget is None else int(budget)
        self._counts = {stage: 0 for stage in STAGES}
        self._lock = threading.Lock()

    additive_stage = _stage_property(STAGE_ADDITIVE)
    msvd_stage = _stage_property(STAGE_MSVD)
    gss_stage = _stage_property(STAGE_GSS)
    gsvd_stage = _stage_property(STAGE_GSVD)
    nvg_stage = _stage_property(STAGE_NVG)
    baseline = _stage_property(STAGE_BASELINE)
    optimization = _stage_property(STAGE_OPTIMIZATION)

    @staticmethod
    def _check_stage(stage):
        if stage not in STAGES:
            raise ValueError(
                f"Unknown ledger stage {stage!r}; expected one of {', '.join(STAGES)}"
            )

    def charge(self, stage, count=1):
        """
        Record `count` evaluations against `stage`

        :param stage: Stage tag
        :type stage: str
        :param count: Number of evaluations, defaults to 1
        :type count: int
        """

        self._check_stage(stage)

        if count < 0:
            raise ValueError(f"Cannot charge a negative count ({count})")

        with self._lock:
            total = sum(self._counts.values())

            if self.budget is not None and total + count > self.budget:
                raise BudgetExhaustedError(
                    f"Charging {count} evaluation(s) to {stage} would exceed "
                    f"the budget of {self.budget} (used {total})"
                )

            self._counts[stage] += count

    def count(self, stage):
        self._check_stage(stage)

        with self._lock:
            return self._counts[stage]

    @property
    def total(self):
        with self._lock:
            return sum(self._counts.values())

    @property
    def remaining(self):
        if self.budget is None:
            return None
        return self.budget - self.total

    def to_dict(self):
        with self._lock:
            out = dict(self._counts)

        out["total"] = sum(out.values())
        return out

    def __repr__(self):
        return f"FeLedger(total={self.total}, budget={self.budget})"


class ObjectiveProblem:
    """
    Box-bounded black-box minimization problem.

    :param objective: Function mapping an n-vector to a real. With
        `vectorized=True` it must also map a (p, n) array to p values.
    :type objective: callable
    :param lower_bounds: Lower bounds, length n
    :type lower_bounds: np.ndarray
    :param upper_bounds: Upper bounds, length n
    :type upper_bounds: np.ndarray
    :param ledger: Evaluation counter, defaults to a new unbudgeted ledger
    :type ledger: FeLedger, optional
    :param vectorized: Objective accepts 2d arrays, defaults to False
    :type vectorized: bool, optional
    :param name: Label for logs and reports
    :type name: str, optional
    """

    def __init__(
        self,
        objective,
        lower_bounds,
        upper_bounds,
        ledger=None,
        vectorized=False,
        name=None
    ):

        lower_bounds = _np.array(lower_bounds, dtype=float).ravel()
        upper_bounds = _np.array(upper_bounds, dtype=float).ravel()

        if lower_bounds.shape != upper_bounds.shape:
            raise ValueError(
                f"Bounds must have the same shape; lower {lower_bounds.shape} "
                f"and upper {upper_bounds.shape} provided"
            )
        elif lower_bounds.size == 0:
            raise ValueError("A problem needs at least one variable")
        elif not (_np.all(_np.isfinite(lower_bounds)) and _np.all(_np.isfinite(upper_bounds))):
            raise ValueError("Bounds must be finite")
        elif _np.any(lower_bounds >= upper_bounds):
            bad = _np.flatnonzero(lower_bounds >= upper_bounds)
            raise ValueError(f"lb[i] < ub[i] is violated for variables {bad.tolist()}")

        lower_bounds.flags.writeable = False
        upper_bounds.flags.writeable = False

        self.objective = objective
        self.lower_bounds = lower_bounds
        self.upper_bounds = upper_bounds
        self.ledger = FeLedger() if ledger is None else ledger
        self.vectorized = vectorized
        self.name = name

    @property
    def dimension(self):
        return self.lower_bounds.size

    @property
    def ranges(self):
        return self.upper_bounds - self.lower_bounds

    @property
    def midpoint(self):
        return (self.lower_bounds + self.upper_bounds) / 2

    def with_ledger(self, ledger=None):
        """
        Same objective and bounds, counted on another ledger

        :param ledger: Ledger for the new problem, defaults to a new
            unbudgeted ledger
        :type ledger: FeLedger, optional
        :return: Problem sharing everything but the ledger
        :rtype: ObjectiveProblem
        """

        return ObjectiveProblem(
            self.objective,
            self.lower_bounds,
            self.upper_bounds,
            ledger=FeLedger() if ledger is None else ledger,
            vectorized=self.vectorized,
            name=self.name
        )

    def evaluate(self, point, stage):
        """
        Evaluate the objective once and charge it to `stage`.
        Points are not clamped or checked against the bounds.

        :param point: n-vector
        :type point: np.ndarray
        :param stage: Ledger stage tag
        :type stage: str
        :return: Objective value
        :rtype: float
        """

        point = _np.asarray(point, dtype=float)

        if point.shape != (self.dimension, ):
            raise ValueError(
                f"Point must have shape ({self.dimension},); {point.shape} provided"
            )

        self.ledger.charge(stage)
        return float(self.objective(point))

    def evaluate_many(self, points, stage):
        """
        Evaluate every row of `points`, charging one evaluation per row

        :param points: (p, n) array
        :type points: np.ndarray
        :param stage: Ledger stage tag
        :type stage: str
        :return: p objective values
        :rtype: np.ndarray
        """

        points = _np.asarray(points, dtype=float)

        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ValueError(
                f"Points must have shape (p, {self.dimension}); {points.shape} provided"
            )

        self.ledger.charge(stage, points.shape[0])

        if self.vectorized:
            return _np.asarray(self.objective(points), dtype=float).reshape(-1)
        else:
            return _np.array([self.objective(p) for p in points], dtype=float)

    def __repr__(self):
        label = self.name or "ObjectiveProblem"
        return f"{label}(dimension={self.dimension}, ledger={self.ledger!r})"


def evaluate(problem, point, stage):
    """
    Evaluate `problem` at `point`, charging one evaluation to `stage`

    :param problem: Problem to evaluate
    :type problem: ObjectiveProblem
    :param point: n-vector
    :type point: np.ndarray
    :param stage: Ledger stage tag
    :type stage: str
    :return: Objective value
    :rtype: float
    """

    return problem.evaluate(point, stage)


def _sorted_ints(values):
    return sorted(int(v) for v in values)


@dataclass
class GroupingResult:
    """
    Output of every decomposer: three separable classes and the
    non-separable groups. Index sets are stored sorted and groups are
    ordered by their smallest member.
    """

    additively_separable: list = field(default_factory=list)
    multiplicatively_separable: list = field(default_factory=list)
    generally_separable: list = field(default_factory=list)
    nonseparable_groups: list = field(default_factory=list)

    def __post_init__(self):
        self.additively_separable = _sorted_ints(self.additively_separable)
        self.multiplicatively_separable = _sorted_ints(self.multiplicatively_separable)
        self.generally_separable = _sorted_ints(self.generally_separable)
        groups = [_sorted_ints(g) for g in self.nonseparable_groups]
        self.nonseparable_groups = sorted(groups, key=lambda g: g[0] if g else -1)

    @property
    def s1(self):
        return self.additively_separable

    @property
    def s2(self):
        return self.multiplicatively_separable

    @property
    def s3(self):
        return self.generally_separable

    def separable_variables(self):
        return set(self.s1) | set(self.s2) | set(self.s3)

    def all_sets(self):
        return [self.s1, self.s2, self.s3] + list(self.nonseparable_groups)

    def validate(self, dimension):
        """
        Check that the sets are pairwise disjoint, that they cover
        0..dimension-1 exactly, and that no group is empty.

        :param dimension: Number of variables of the decomposed problem
        :type dimension: int
        :raises ValueError: On any violation
        """

        seen = {}

        for k, g in enumerate(self.nonseparable_groups):
            if len(g) == 0:
                raise ValueError(f"Non-separable group {k} is empty")

        for name, members in zip(
            ["S1", "S2", "S3"] + [f"N[{k}]" for k in range(len(self.nonseparable_groups))],
            self.all_sets()
        ):
            for v in members:
                if v in seen:
                    raise ValueError(f"Variable {v} is in both {seen[v]} and {name}")
                elif v < 0 or v >= dimension:
                    raise ValueError(f"Variable {v} is outside 0..{dimension - 1}")
                seen[v] = name

        if len(seen) != dimension:
            missing = sorted(set(range(dimension)) - set(seen))
            raise ValueError(f"Variables {missing} are not assigned to any set")

        return True

    def to_dict(self, ledger=None):
        out = {
            "s1": list(self.s1),
            "s2": list(self.s2),
            "s3": list(self.s3),
            "nonsep": [list(g) for g in self.nonseparable_groups]
        }

        if ledger is not None:
            out["ledger"] = ledger.to_dict() if isinstance(ledger, FeLedger) else dict(ledger)

        return out

    def to_json(self, ledger=None, **kwargs):
        return json.dumps(self.to_dict(ledger), **kwargs)

    @classmethod
    def from_dict(cls, data):
        return cls(
            additively_separable=data.get("s1", []),
            multiplicatively_separable=data.get("s2", []),
            generally_separable=data.get("s3", []),
            nonseparable_groups=data.get("nonsep", [])
        )

    def summary(self):
        return {
            "s1": len(self.s1),
            "s2": len(self.s2),
            "s3": len(self.s3),
            "groups": len(self.nonseparable_groups),
            "group_sizes": [len(g) for g in self.nonseparable_groups]
        }
