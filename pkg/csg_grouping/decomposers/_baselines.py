import math

import numpy as _np
import scipy.sparse as _sps
from scipy.sparse.csgraph import connected_components

from csg_grouping._constants import STAGE_BASELINE
from csg_grouping._problem import GroupingResult
from csg_grouping._debug import debug_print
from csg_grouping.decomposers._common import gamma, error_order, eps1_threshold, evaluate_finite


class NonPositiveFitnessError(ValueError):
    pass


def _with_upper(problem, base, indices):
    x = base.copy()
    x[indices] = problem.upper_bounds[indices]
    return x


def _groups_from_matrix(matrix):
    """
    Connected components of a boolean interaction matrix with at least
    two members, plus the isolated variables
    """

    n_comp, labels = connected_components(_sps.csr_matrix(matrix), directed=False)

    members = [[] for _ in range(n_comp)]
    for v, label in enumerate(labels):
        members[label].append(v)

    isolated = [m[0] for m in members if len(m) == 1]
    groups = [m for m in members if len(m) > 1]

    return isolated, groups


def _pairwise_probes(problem):
    """
    Corner probes for every pair (p, q): the base point, p moved to ub,
    q moved to ub, and both moved to ub. Uses 1 + n + 2 * C(n, 2) evaluations.
    """

    n = problem.dimension
    base = problem.lower_bounds.copy()

    f_base = evaluate_finite(problem, base, STAGE_BASELINE)
    f_single = _np.array([
        evaluate_finite(problem, _with_upper(problem, base, [p]), STAGE_BASELINE)
        for p in range(n)
    ])

    for p in range(n):
        for q in range(p + 1, n):
            f_q = evaluate_finite(problem, _with_upper(problem, base, [q]), STAGE_BASELINE)
            f_pq = evaluate_finite(problem, _with_upper(problem, base, [p, q]), STAGE_BASELINE)
            yield p, q, (f_base, f_single[p], f_q, f_pq)


def _additive_interaction(values, n, epsilon):
    f_base, f_p, f_q, f_pq = values
    delta1 = f_p - f_base
    delta2 = f_pq - f_q
    eps = eps1_threshold(values, n) if epsilon is None else epsilon
    return abs(delta1 - delta2) > eps


def dg_pairwise(problem, epsilon=None):
    """
    Pairwise differential grouping over the box corners.

    Variable p is moved from lb to ub with q at lb, then with q at ub; the
    pair interacts when the two differences disagree by more than
    `epsilon`. Variables with no interaction are reported as additively
    separable; connected components become the non-separable groups.

    :param problem: Problem to decompose
    :type problem: ObjectiveProblem
    :param epsilon: Fixed threshold; defaults to the rounding-error
        threshold of each pair's four values
    :type epsilon: float, optional
    :return: Symmetric interaction matrix with a false diagonal, and the grouping
    :rtype: tuple(np.ndarray, GroupingResult)
    """

    n = problem.dimension

    if n < 2:
        raise ValueError(f"dg_pairwise needs at least 2 variables; {n} provided")

    matrix = _np.zeros((n, n), dtype=bool)

    for p, q, values in _pairwise_probes(problem):
        if _additive_interaction(values, n, epsilon):
            matrix[p, q] = matrix[q, p] = True

    isolated, groups = _groups_from_matrix(matrix)

    debug_print(f"DG: {len(isolated)} separable, {len(groups)} group(s)")

    return matrix, GroupingResult(additively_separable=isolated, nonseparable_groups=groups)


def rdg_set_interact(problem, X1, X2, base_point=None, magnitudes=None, epsilon=None):
    """
    One-to-all interaction test between two disjoint variable sets

    :param problem: Problem to probe
    :type problem: ObjectiveProblem
    :param X1: First variable set
    :type X1: list(int)
    :param X2: Second variable set
    :type X2: list(int)
    :param base_point: Base point x*, defaults to the lower bounds
    :type base_point: np.ndarray, optional
    :param magnitudes: Per-variable step added on each set, defaults to
        the full range ub - lb
    :type magnitudes: np.ndarray, optional
    :param epsilon: Fixed threshold, defaults to the rounding-error threshold
    :type epsilon: float, optional
    :return: True if the sets interact
    :rtype: bool
    """

    X1, X2 = list(X1), list(X2)

    if len(X1) == 0 or len(X2) == 0:
        return False
    elif set(X1) & set(X2):
        raise ValueError("X1 and X2 must be disjoint")

    base = problem.lower_bounds.copy() if base_point is None else _np.array(base_point, dtype=float)
    steps = problem.ranges if magnitudes is None else _np.broadcast_to(
        _np.asarray(magnitudes, dtype=float), (problem.dimension, )
    )

    x1 = base.copy()
    x1[X1] += steps[X1]
    x2 = base.copy()
    x2[X2] += steps[X2]
    x12 = x1.copy()
    x12[X2] += steps[X2]

    values = [
        evaluate_finite(problem, base, STAGE_BASELINE),
        evaluate_finite(problem, x1, STAGE_BASELINE),
        evaluate_finite(problem, x2, STAGE_BASELINE),
        evaluate_finite(problem, x12, STAGE_BASELINE)
    ]

    f_base, f_1, f_2, f_12 = values
    eps = eps1_threshold(values, problem.dimension) if epsilon is None else epsilon

    return abs((f_12 - f_2) - (f_1 - f_base)) > eps


def _interacting_subset(problem, X1, X2, epsilon):
    if not rdg_set_interact(problem, X1, X2, epsilon=epsilon):
        return []
    elif len(X2) == 1:
        return list(X2)

    split = math.ceil(len(X2) / 2)

    return (
        _interacting_subset(problem, X1, X2[:split], epsilon) +
        _interacting_subset(problem, X1, X2[split:], epsilon)
    )


def rdg_like_decompose(problem, epsilon=None):
    """
    Recursive grouping built on rdg_set_interact with binary splitting.
    A group grows until nothing left interacts with it; singletons are
    reported as additively separable.

    :return: Grouping and the problem's ledger
    :rtype: tuple(GroupingResult, FeLedger)
    """

    remaining = list(range(problem.dimension))
    separable, groups = [], []

    while remaining:

        X1, X2 = [remaining[0]], remaining[1:]

        while X2:
            found = _interacting_subset(problem, X1, X2, epsilon)

            if not found:
                break

            found_set = set(found)
            X1 = X1 + found
            X2 = [v for v in X2 if v not in found_set]

        if len(X1) == 1:
            separable.append(X1[0])
        else:
            groups.append(X1)

        remaining = X2

    debug_print(f"RDG-like: {len(separable)} separable, {len(groups)} group(s)")

    result = GroupingResult(additively_separable=separable, nonseparable_groups=groups)
    return result, problem.ledger


def _log_values(values, label):
    values = _np.asarray(values, dtype=float)

    if _np.any(values <= 0):
        raise NonPositiveFitnessError(
            f"The multiplicative test needs positive objective values; "
            f"{label} gave {values.tolist()}"
        )

    return _np.log(values)


def _multiplicative_pair(log_values, n, threshold=None):
    l_base, l_p, l_q, l_pq = log_values
    gap = abs((l_p - l_base) - (l_pq - l_q))

    if threshold is None:
        threshold = max(1e-10, 10 * gamma(error_order(n)) * (float(_np.sum(_np.abs(log_values))) + 4))

    return gap <= threshold


def ddg_pairwise_check(problem, p, q, threshold=None):
    """
    Log-domain pairwise test: p and q are multiplicatively separable when
    ln f changes additively as both move from lb to ub.

    :raises NonPositiveFitnessError: If any of the four probe values is <= 0
    :return: True if the pair is multiplicatively separable
    :rtype: bool
    """

    if p == q:
        raise ValueError(f"p and q must differ; both are {p}")

    base = problem.lower_bounds.copy()
    values = [
        evaluate_finite(problem, base, STAGE_BASELINE),
        evaluate_finite(problem, _with_upper(problem, base, [p]), STAGE_BASELINE),
        evaluate_finite(problem, _with_upper(problem, base, [q]), STAGE_BASELINE),
        evaluate_finite(problem, _with_upper(problem, base, [p, q]), STAGE_BASELINE)
    ]

    return _multiplicative_pair(_log_values(values, f"pair ({p}, {q})"), problem.dimension, threshold)


def ddg_decompose(problem, epsilon=None):
    """
    Pairwise grouping that combines the additive test with the log-domain
    multiplicative test over the same corner probes.

    Variables without additive interactions are additively separable.
    Variables whose every interaction passes the multiplicative test are
    multiplicatively separable. The remaining pairs form the non-separable
    groups.

    :return: Grouping and the problem's ledger
    :rtype: tuple(GroupingResult, FeLedger)
    """

    n = problem.dimension

    if n < 2:
        raise ValueError(f"ddg_decompose needs at least 2 variables; {n} provided")

    additive_links = _np.zeros((n, n), dtype=bool)
    coupled = _np.zeros((n, n), dtype=bool)

    for p, q, values in _pairwise_probes(problem):

        if not _additive_interaction(values, n, epsilon):
            continue

        additive_links[p, q] = additive_links[q, p] = True

        if not _multiplicative_pair(_log_values(values, f"pair ({p}, {q})"), n):
            coupled[p, q] = coupled[q, p] = True

    linked = additive_links.any(axis=1)
    entangled = coupled.any(axis=1)

    s1 = [v for v in range(n) if not linked[v]]
    s2 = [v for v in range(n) if linked[v] and not entangled[v]]

    _, groups = _groups_from_matrix(coupled)

    debug_print(f"DDG: {len(s1)} additive, {len(s2)} multiplicative, {len(groups)} group(s)")

    result = GroupingResult(
        additively_separable=s1,
        multiplicatively_separable=s2,
        nonseparable_groups=groups
    )
    return result, problem.ledger
