import math

import numpy as _np

from csg_grouping._constants import (
    UNIT_ROUNDOFF,
    DEFAULT_EPS2_SCALE,
    DEFAULT_EPS2_FLOOR
)
from csg_grouping._problem import NonFiniteObjectiveError


def gamma(k):
    """
    Rounding-error growth factor k*u / (1 - k*u) for float64

    :param k: Number of accumulated operations
    :type k: float
    :return: Error bound factor
    :rtype: float
    """

    ku = k * UNIT_ROUNDOFF

    if ku >= 1:
        raise ValueError(f"gamma({k}) is undefined; k*u must be below 1")

    return ku / (1 - ku)


def error_order(n):
    return math.sqrt(n) + 2


def eps1_threshold(values, n):
    """
    Additivity threshold from the rounding error of a four-point
    finite difference

    :param values: The four corner values
    :type values: iterable of float
    :param n: Problem dimension
    :type n: int
    :return: Threshold for beta1
    :rtype: float
    """

    return gamma(error_order(n)) * float(_np.sum(_np.abs(values)))


def eps2_threshold(
    delta1,
    delta2,
    values,
    primed_values,
    differences,
    n,
    scale=DEFAULT_EPS2_SCALE,
    floor=DEFAULT_EPS2_FLOOR
):
    """
    Multiplicativity threshold for the log-domain difference beta2.
    The cancellation error of each F = f - f' is bounded relative to |F|.

    :return: Threshold for beta2
    :rtype: float
    """

    values = _np.abs(_np.asarray(values, dtype=float))
    primed_values = _np.abs(_np.asarray(primed_values, dtype=float))
    differences = _np.abs(_np.asarray(differences, dtype=float))

    cancellation = float(_np.sum((values + primed_values) / differences))
    magnitude = abs(delta1) + abs(delta2) + 1.0 + cancellation

    return max(floor, scale * gamma(error_order(n)) * magnitude)


def evaluate_finite(problem, point, stage):
    """
    Evaluate and refuse NaN or infinite values

    :raises NonFiniteObjectiveError: If the objective is not finite at `point`
    """

    value = problem.evaluate(point, stage)

    if not _np.isfinite(value):
        raise NonFiniteObjectiveError(
            f"Objective returned {value} at a {stage} probe point"
        )

    return value
