from dataclasses import dataclass, field

from csg_grouping._problem import FeLedger

ORDER_SIZE = "size"
ORDER_INDEX = "index"


def sa(truth, result):
    """
    Share of the truly separable variables that `result` reports as
    separable (any of its three classes)

    :param truth: True grouping
    :type truth: GroupingResult
    :param result: Grouping to score
    :type result: GroupingResult
    :return: Ratio in [0, 1], or None if truth has no separable variables
    :rtype: float or None
    """

    true_sep = truth.separable_variables()

    if len(true_sep) == 0:
        return None

    return len(true_sep & result.separable_variables()) / len(true_sep)


def _true_group_order(groups, order):
    if order == ORDER_SIZE:
        return sorted(groups, key=lambda g: (-len(g), min(g)))
    elif order == ORDER_INDEX:
        return sorted(groups, key=min)
    else:
        raise ValueError(f"order must be {ORDER_SIZE!r} or {ORDER_INDEX!r}; {order!r} provided")


def na(truth, result, order=ORDER_SIZE):
    """
    Non-separable group accuracy. True groups are matched greedily, each
    to the unused formed group with the largest overlap; a formed group is
    used at most once.

    :param truth: True grouping
    :type truth: GroupingResult
    :param result: Grouping to score
    :type result: GroupingResult
    :param order: Matching order of the true groups: "size" (largest
        first, ties by smallest index) or "index"
    :type order: str
    :return: Matched overlap over total true group size, or None if truth
        has no non-separable groups
    :rtype: float or None
    """

    true_groups = [set(g) for g in truth.nonseparable_groups if len(g) > 0]

    if len(true_groups) == 0:
        return None

    formed = [set(g) for g in result.nonseparable_groups]
    used = [False] * len(formed)
    matched = 0

    for group in _true_group_order(true_groups, order):

        best, best_overlap = None, 0

        for k, candidate in enumerate(formed):
            if used[k]:
                continue

            overlap = len(group & candidate)

            if overlap > best_overlap:
                best, best_overlap = k, overlap

        if best is not None:
            used[best] = True
            matched += best_overlap

    return matched / sum(len(g) for g in true_groups)


@dataclass
class AccuracyReport:
    sa: float
    na: float
    fe_total: int
    fe_by_stage: dict = field(default_factory=dict)

    @classmethod
    def from_results(cls, truth, result, ledger, order=ORDER_SIZE):
        stages = ledger.to_dict() if isinstance(ledger, FeLedger) else dict(ledger)
        stages.pop("total", None)

        return cls(
            sa=sa(truth, result),
            na=na(truth, result, order=order),
            fe_total=int(sum(stages.values())),
            fe_by_stage=stages
        )

    def to_dict(self):
        return {
            "sa": self.sa,
            "na": self.na,
            "fe_total": self.fe_total,
            "fe_by_stage": dict(self.fe_by_stage)
        }

    def to_row(self):
        """
        Flat row with the decomposition table's SA, NA, and FE columns
        """

        return {
            "sa": self.sa,
            "na": self.na,
            "fe_additive": self.fe_by_stage.get("additive_stage", 0),
            "fe_msvd": self.fe_by_stage.get("msvd_stage", 0),
            "fe_gss": self.fe_by_stage.get("gss_stage", 0),
            "fe_gsvd": self.fe_by_stage.get("gsvd_stage", 0),
            "fe_nvg": self.fe_by_stage.get("nvg_stage", 0),
            "fe_total": self.fe_total
        }
