import math

import numpy as _np

from csg_grouping._constants import STAGE_GSVD, STAGE_NVG, PROBE_GROWTH
from csg_grouping._problem import NonFiniteObjectiveError
from csg_grouping._debug import debug_print
from csg_grouping.decomposers._common import evaluate_finite, eps1_threshold

SHIFTED = "shifted"
UNMOVED = "unmoved"
AT_BOUND = "at_bound"


def _per_variable(value, n):
    return _np.broadcast_to(_np.asarray(value, dtype=float), (n, ))


def _minimum_shifted(problem, x, i, delta0, stage):
    """
    Probe x[i] +/- delta, growing delta tenfold while both sides tie with f(x).
    Values within the rounding error of f(x) and the probe count as ties.

    :return: SHIFTED if a feasible probe is below f(x) by more than the
        rounding error, AT_BOUND if the probes left the box first,
        UNMOVED otherwise
    :rtype: str
    """

    lb, ub = problem.lower_bounds[i], problem.upper_bounds[i]
    y = evaluate_finite(problem, x, stage)
    delta = float(delta0)

    while True:

        lower, equal, left_box = False, False, False

        for sign in (-1.0, 1.0):
            probe = x.copy()
            probe[i] = x[i] + sign * delta
            in_box = lb <= probe[i] <= ub

            with _np.errstate(all="ignore"):
                value = problem.evaluate(probe, stage)

            if not in_box:
                left_box = True
                continue
            elif not _np.isfinite(value):
                raise NonFiniteObjectiveError(
                    f"Objective returned {value} at an in-box {stage} probe "
                    f"of variable {i}"
                )

            tolerance = eps1_threshold((y, value), problem.dimension)

            if value < y - tolerance:
                lower = True
            elif abs(value - y) <= tolerance:
                equal = True

        if lower:
            return SHIFTED
        elif left_box:
            return AT_BOUND
        elif not equal:
            return UNMOVED

        delta *= PROBE_GROWTH


def _shift_detected(problem, i, moved, archive, delta0, stage, upper, lower):
    """
    Move `moved` to `upper` in the archived row of `i` and test for a shift.
    A minimum pinned at a bound is tested once more with `moved` at `lower`.
    """

    x = archive.row(i)
    x[moved] = upper[moved]
    outcome = _minimum_shifted(problem, x, i, delta0, stage)

    if outcome == AT_BOUND and len(moved) > 0:
        x = archive.row(i)
        x[moved] = lower[moved]
        outcome = _minimum_shifted(problem, x, i, delta0, stage)

    return outcome == SHIFTED


def _targets(problem, upper, lower):
    upper = problem.upper_bounds if upper is None else _np.asarray(upper, dtype=float)
    lower = problem.lower_bounds if lower is None else _np.asarray(lower, dtype=float)
    return upper, lower


def gsvd(problem, variables, archive, delta0, upper=None, lower=None, shrinking=False):
    """
    Find the generally separable variables among `variables`.

    For each variable, start from its archived context row, move the other
    variables of the set to `upper`, and check whether its minimum shifts.
    When the minimum sits on a bound and does not move, the check is
    repeated with the other variables at `lower`. Variables whose minimum
    stays put are separable.

    :param problem: Problem being decomposed
    :type problem: ObjectiveProblem
    :param variables: Candidate variables, each with an archived row
    :type variables: list(int)
    :param archive: Context archive from the search stage
    :type archive: ContextArchive
    :param delta0: Initial probe step, scalar or per variable
    :type delta0: float or np.ndarray
    :param upper: Values the other variables are moved to,
        defaults to the upper bounds
    :type upper: np.ndarray, optional
    :param lower: Values used for the repeat check at a bound,
        defaults to the lower bounds
    :type lower: np.ndarray, optional
    :param shrinking: Remove each inspected variable from the set before
        moving the rest, defaults to False
    :type shrinking: bool, optional
    :return: Generally separable variables
    :rtype: list(int)
    """

    n = problem.dimension
    delta0 = _per_variable(delta0, n)
    upper, lower = _targets(problem, upper, lower)

    variables = [int(v) for v in variables]
    remaining = list(variables)
    separable = []

    for i in variables:

        if shrinking:
            remaining.remove(i)
            others = list(remaining)
        else:
            others = [v for v in variables if v != i]

        if not _shift_detected(problem, i, others, archive, delta0[i], STAGE_GSVD, upper, lower):
            separable.append(i)
            debug_print(f"GSVD: x{i} is generally separable")

    return separable


def rgd(problem, variable, groups, archive, delta0, upper=None, lower=None):
    """
    Find the groups in `groups` that `variable` interacts with by
    recursive halving.

    :param problem: Problem being decomposed
    :type problem: ObjectiveProblem
    :param variable: Variable to test
    :type variable: int
    :param groups: Non-empty list of variable groups
    :type groups: list(list(int))
    :param archive: Context archive from the search stage
    :type archive: ContextArchive
    :param delta0: Initial probe step, scalar or per variable
    :type delta0: float or np.ndarray
    :param upper: Values the group members are moved to,
        defaults to the upper bounds
    :type upper: np.ndarray, optional
    :param lower: Values used for the repeat check at a bound,
        defaults to the lower bounds
    :type lower: np.ndarray, optional
    :return: The interacting groups (the same list objects as in `groups`)
    :rtype: list(list(int))
    """

    if len(groups) == 0:
        raise ValueError("rgd needs at least one group to test against")

    n = problem.dimension
    delta0 = _per_variable(delta0, n)
    upper, lower = _targets(problem, upper, lower)

    members = [v for g in groups for v in g]

    if not _shift_detected(
        problem, variable, members, archive, delta0[variable], STAGE_NVG, upper, lower
    ):
        return []
    elif len(groups) == 1:
        return list(groups)

    split = math.ceil(len(groups) / 2)

    return (
        rgd(problem, variable, groups[:split], archive, delta0, upper, lower) +
        rgd(problem, variable, groups[split:], archive, delta0, upper, lower)
    )


def nvg(problem, variables, archive, delta0, upper=None, lower=None, seed=None):
    """
    Group non-separable variables. Variables are taken in ascending
    order, or in a seeded random order when `seed` is given. Each one
    starts a new group, joins the single group it interacts with, or
    merges every group it interacts with.

    :return: Non-separable groups
    :rtype: list(list(int))
    """

    order = sorted(int(v) for v in variables)

    if len(order) == 0:
        return []

    if seed is not None:
        order = [int(v) for v in _np.random.default_rng(seed).permutation(order)]

    groups = [[order[0]]]

    for v in order[1:]:

        hits = rgd(problem, v, groups, archive, delta0, upper, lower)

        if len(hits) == 0:
            groups.append([v])
        elif len(hits) == 1:
            hits[0].append(v)
        else:
            hit_ids = {id(g) for g in hits}
            position = next(k for k, g in enumerate(groups) if id(g) in hit_ids)
            merged = sorted([m for g in hits for m in g] + [v])

            groups = [g for g in groups if id(g) not in hit_ids]
            groups.insert(position, merged)

        debug_print(f"NVG: x{v} interacts with {len(hits)} group(s)")

    return [sorted(g) for g in groups]
