import math

import numpy as _np

from csg_grouping._constants import STAGE_GSS
from csg_grouping.decomposers._common import evaluate_finite

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def gss_iteration_bound(width, eps):
    """
    Number of contractions needed to shrink a bracket of `width` below `eps`

    :param width: Initial bracket width
    :type width: float
    :param eps: Target precision
    :type eps: float
    :return: ceil(log(eps / width) / log(0.618...)), or 0 if eps >= width
    :rtype: int
    """

    if eps <= 0:
        raise ValueError(f"eps must be positive; {eps} provided")
    elif width <= 0:
        raise ValueError(f"width must be positive; {width} provided")
    elif eps >= width:
        return 0

    return int(math.ceil(math.log(eps / width) / math.log(INV_PHI)))


def gss_minimize(problem, i, context, eps, stage=STAGE_GSS):
    """
    Golden section search along coordinate `i` with every other
    coordinate fixed to `context`.

    Uses at most gss_iteration_bound(ub[i] - lb[i], eps) + 2 evaluations.
    The search stops early when both interior points have equal values,
    keeping the bracket between them.

    :param problem: Problem to search
    :type problem: ObjectiveProblem
    :param i: Coordinate index
    :type i: int
    :param context: n-vector; only coordinate i varies
    :type context: np.ndarray
    :param eps: Bracket width at which the search ends
    :type eps: float
    :param stage: Ledger stage to charge, defaults to the GSS stage
    :type stage: str
    :return: Midpoint of the final bracket
    :rtype: float
    """

    a, b = float(problem.lower_bounds[i]), float(problem.upper_bounds[i])
    h = b - a
    n_iter = gss_iteration_bound(h, eps)

    x = _np.array(context, dtype=float)

    def f(value):
        x[i] = value
        return evaluate_finite(problem, x, stage)

    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    yc, yd = f(c), f(d)

    for _ in range(n_iter):

        if yc == yd:
            return (c + d) / 2

        h *= INV_PHI

        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)

    if yc < yd:
        return (a + d) / 2
    elif yc > yd:
        return (c + b) / 2
    else:
        return (c + d) / 2
