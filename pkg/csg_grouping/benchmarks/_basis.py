from dataclasses import dataclass, field

import numpy as _np

from csg_grouping._constants import (
    CLASS_ADDITIVE,
    CLASS_MULTIPLICATIVE,
    CLASS_COMPOSITE,
    CLASS_NONSEPARABLE
)

# Every basis maps (..., k) arrays to (...) arrays and is minimal at z = 0


def _sphe(z):
    return _np.sum(z ** 2, axis=-1)


def _elli(z):
    k = z.shape[-1]

    if k == 1:
        weights = _np.ones(1)
    else:
        weights = 10.0 ** (6.0 * _np.arange(k) / (k - 1))

    return _np.sum(weights * z ** 2, axis=-1)


def _rast_terms(z):
    return z ** 2 - 10.0 * _np.cos(2.0 * _np.pi * z) + 10.0


def _rast(z):
    return _np.sum(_rast_terms(z), axis=-1)


def _rosen(z):
    y = z + 1.0

    if y.shape[-1] < 2:
        return _np.zeros(y.shape[:-1])

    head, tail = y[..., :-1], y[..., 1:]
    return _np.sum(100.0 * (head ** 2 - tail) ** 2 + (head - 1.0) ** 2, axis=-1)


def _schw(z):
    return _np.sum(_np.cumsum(z, axis=-1) ** 2, axis=-1)


def _logabs(z):
    return _np.log1p(_np.sum(_np.abs(z), axis=-1))


def _cone(z):
    return _np.sqrt(_np.sum(z ** 2, axis=-1))


def _product(log_factors, exponent):
    # Factors are >= 1, so the product is taken in the log domain
    return _np.exp(exponent * _np.sum(log_factors, axis=-1))


@dataclass
class BasisFunction:
    """
    Benchmark building block with a declared separability class.
    Calling it evaluates the basis over the last axis of `z`.
    """

    name: str
    separability_class: str
    func: object = field(repr=False)
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        z = _np.asarray(z, dtype=float)
        out = self.func(z)
        return float(out) if _np.ndim(out) == 0 else out


def _make_rot_rast(params):

    rotation = params.get("rotation", None)

    if rotation is None:
        if "size" not in params:
            raise ValueError("rot_rast needs either a `rotation` matrix or a `size`")

        # Import here; _bms imports this module
        from csg_grouping.benchmarks._bms import random_rotation
        rotation = random_rotation(int(params["size"]), params.get("seed", None))

    rotation = _np.asarray(rotation, dtype=float)

    def _rot_rast(z):
        if z.shape[-1] != rotation.shape[0]:
            raise ValueError(
                f"rot_rast was built for {rotation.shape[0]} variables; "
                f"{z.shape[-1]} provided"
            )
        return _rast(z @ rotation.T)

    return _rot_rast


def make_basis(name, params=None):
    """
    Build a benchmark basis function

    :param name: One of sphe, elli, rast, rosen, schw, rot_rast, prodsqu,
        prodras, logabs, cone
    :type name: str
    :param params: Basis parameters. `exponent` (default 1.0) for prodsqu
        and prodras; `rotation`, or `size` and `seed`, for rot_rast
    :type params: dict, optional
    :return: Callable basis function
    :rtype: BasisFunction
    """

    params = {} if params is None else dict(params)
    exponent = float(params.get("exponent", 1.0))

    if name == "sphe":
        return BasisFunction(name, CLASS_ADDITIVE, _sphe, params)
    elif name == "elli":
        return BasisFunction(name, CLASS_ADDITIVE, _elli, params)
    elif name == "rast":
        return BasisFunction(name, CLASS_ADDITIVE, _rast, params)
    elif name == "rosen":
        return BasisFunction(name, CLASS_NONSEPARABLE, _rosen, params)
    elif name == "schw":
        return BasisFunction(name, CLASS_NONSEPARABLE, _schw, params)
    elif name == "rot_rast":
        return BasisFunction(name, CLASS_NONSEPARABLE, _make_rot_rast(params), params)
    elif name == "prodsqu":
        return BasisFunction(
            name,
            CLASS_MULTIPLICATIVE,
            lambda z: _product(_np.log1p(z ** 2), exponent),
            params
        )
    elif name == "prodras":
        return BasisFunction(
            name,
            CLASS_MULTIPLICATIVE,
            lambda z: _product(_np.log(_rast_terms(z) + 1.0), exponent),
            params
        )
    elif name == "logabs":
        return BasisFunction(name, CLASS_COMPOSITE, _logabs, params)
    elif name == "cone":
        return BasisFunction(name, CLASS_COMPOSITE, _cone, params)
    else:
        raise ValueError(
            f"Unknown basis {name!r}; expected one of {', '.join(BASIS_NAMES)}"
        )


BASIS_NAMES = (
    "sphe",
    "elli",
    "rast",
    "rosen",
    "schw",
    "rot_rast",
    "prodsqu",
    "prodras",
    "logabs",
    "cone"
)
