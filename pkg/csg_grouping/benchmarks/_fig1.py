import numpy as _np

from csg_grouping._problem import ObjectiveProblem, GroupingResult


def _fig1_objective(x):
    x = _np.asarray(x, dtype=float)
    return (
        x[..., 0]
        + x[..., 1] * x[..., 2]
        + _np.sqrt(x[..., 3] + x[..., 4])
        + (x[..., 5] - x[..., 6] - 1.0) ** 2
    )


def fig1_example():
    """
    Seven-variable example mixing every separability class:
    f(x) = x1 + x2*x3 + sqrt(x4 + x5) + (x6 - x7 - 1)^2

    x2..x5 live on [0.5, 5] so the product is sign-constant and the
    square root is defined; the rest live on [-5, 5].

    :return: The problem and its true grouping (0-based indices)
    :rtype: tuple(ObjectiveProblem, GroupingResult)
    """

    lower = _np.array([-5.0, 0.5, 0.5, 0.5, 0.5, -5.0, -5.0])
    upper = _np.array([5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0])

    problem = ObjectiveProblem(
        _fig1_objective,
        lower,
        upper,
        vectorized=True,
        name="fig1"
    )

    truth = GroupingResult(
        additively_separable=[0],
        multiplicatively_separable=[1, 2],
        generally_separable=[3, 4],
        nonseparable_groups=[[5, 6]]
    )

    return problem, truth
