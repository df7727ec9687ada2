from dataclasses import dataclass, field

import numpy as _np

from csg_grouping._constants import (
    BMS_LOWER_BOUND,
    BMS_UPPER_BOUND,
    BMS_BLOCK_SIZE,
    BMS_FULL_SCALE_DIMENSION,
    BMS_COMPOSITE_SHIFT_FLOOR,
    BMS_FUNCTION_IDS,
    CLASS_ADDITIVE,
    CLASS_MULTIPLICATIVE,
    CLASS_COMPOSITE
)
from csg_grouping._problem import ObjectiveProblem, GroupingResult
from csg_grouping.benchmarks._basis import make_basis

# Slices are given in units of D/20 over the permuted variables.
# The optional block entry (basis, outer) fills the remainder with
# independent non-separable blocks joined by `outer`.
_LAYOUTS = {
    1: ([("rast", 10), ("prodras", 10)], None),
    2: ([("sphe", 10), ("prodsqu", 10)], None),
    3: ([("rast", 10), ("logabs", 10)], None),
    4: ([("sphe", 10), ("cone", 10)], None),
    5: ([("prodsqu", 10), ("logabs", 10)], None),
    6: ([("prodras", 10), ("cone", 10)], None),
    7: ([("rast", 8), ("prodsqu", 6), ("logabs", 6)], None),
    8: ([("elli", 6), ("prodras", 8), ("cone", 6)], None),
    9: ([("sphe", 6), ("prodras", 6), ("logabs", 8)], None),
    10: ([("sphe", 5), ("prodras", 5), ("cone", 5), ("rosen", 5)], None),
    11: ([("rast", 5), ("prodsqu", 5), ("logabs", 5), ("schw", 5)], None),
    12: ([("rast", 5), ("prodsqu", 5), ("logabs", 5)], ("rot_rast", "sum")),
    13: ([("rast", 5), ("prodsqu", 5), ("logabs", 5)], ("schw", "sum")),
    14: ([("sphe", 5), ("prodras", 5), ("cone", 5)], ("rot_rast", "sqrt")),
    15: ([("rast", 5), ("prodsqu", 5), ("logabs", 5)], ("schw", "log1p")),
}

_OUTER = {
    "sum": lambda v: v,
    "sqrt": _np.sqrt,
    "log1p": _np.log1p
}


def random_rotation(size, seed=None):
    """
    Random orthogonal matrix from the QR factorisation of a Gaussian matrix

    :param size: Matrix size
    :type size: int
    :param seed: Seed for numpy.random.default_rng
    :type seed: int, optional
    :return: size x size orthogonal matrix
    :rtype: np.ndarray
    """

    if int(size) < 1:
        raise ValueError(f"Rotation size must be at least 1; {size} provided")

    rng = _np.random.default_rng(seed)
    q, r = _np.linalg.qr(rng.standard_normal((int(size), int(size))))

    signs = _np.sign(_np.diag(r))
    signs[signs == 0] = 1.0

    return q * signs


def _one_sided_shift(shift, members, center, half_width):
    """
    Move the shifts of a composite slice to one side of the box centre,
    at least BMS_COMPOSITE_SHIFT_FLOOR * half_width away from it. Composite
    bases are even in each coordinate about the shift, so a slice centred
    in the box passes the corner tests for additive and multiplicative
    separability.
    """

    offsets = shift[members] - center
    sign = 1.0 if _np.sum(offsets) >= 0 else -1.0
    floor = BMS_COMPOSITE_SHIFT_FLOOR * half_width

    shift[members] = center + sign * (floor + (1 - BMS_COMPOSITE_SHIFT_FLOOR) * _np.abs(offsets))


def _block_size(function_id, dimension):

    if dimension >= BMS_FULL_SCALE_DIMENSION:
        if (dimension // 4) % BMS_BLOCK_SIZE != 0:
            raise ValueError(
                f"f{function_id} at dimension {dimension} needs D/4 to be a "
                f"multiple of {BMS_BLOCK_SIZE}"
            )
        return BMS_BLOCK_SIZE

    block = dimension // 20

    if block < 2:
        raise ValueError(
            f"f{function_id} needs non-separable blocks of at least 2 variables; "
            f"dimension {dimension} gives blocks of {block}"
        )

    return block


@dataclass(frozen=True)
class BmsInstance:
    """
    A generated benchmark function. `problem` evaluates
    f(x) with z = x - shift, permuted by `permutation` before slicing.
    """

    function_id: int
    dimension: int
    seed: object
    shift: _np.ndarray = field(repr=False)
    permutation: _np.ndarray = field(repr=False)
    rotation_blocks: list = field(repr=False)
    ground_truth: GroupingResult = field(repr=False)
    problem: ObjectiveProblem = field(repr=False)
    block_size: int = None
    terms: tuple = ()
    minimum_value: float = 0.0

    @property
    def name(self):
        return f"f{self.function_id}"

    def objective(self, x):
        return self.problem.objective(x)

    def to_dict(self):
        return {
            "function_id": self.function_id,
            "dimension": self.dimension,
            "seed": self.seed,
            "block_size": self.block_size,
            "terms": [list(t) for t in self.terms],
            "minimum_value": self.minimum_value,
            "ground_truth": self.ground_truth.to_dict()
        }


def build_bms(function_id, dimension, seed=None):
    """
    Build benchmark function f1-f15 on the box [-5, 5]^D

    :param function_id: Function number, 1 to 15
    :type function_id: int
    :param dimension: Number of variables. Must be divisible by 20;
        f12-f15 also need D >= 40
    :type dimension: int
    :param seed: Seed for shift, permutation, and rotations
    :type seed: int, optional
    :return: Deterministic instance for (function_id, dimension, seed)
    :rtype: BmsInstance
    """

    if function_id not in BMS_FUNCTION_IDS:
        raise ValueError(
            f"function_id must be one of 1..{BMS_FUNCTION_IDS[-1]}; {function_id} provided"
        )

    if int(dimension) != dimension or dimension < 20 or dimension % 20 != 0:
        raise ValueError(
            f"dimension must be a positive multiple of 20; {dimension} provided"
        )

    function_id, dimension = int(function_id), int(dimension)
    unit = dimension // 20
    segments, block_spec = _LAYOUTS[function_id]

    block_size = _block_size(function_id, dimension) if block_spec is not None else None

    rng = _np.random.default_rng(seed)
    half_width = (BMS_UPPER_BOUND - BMS_LOWER_BOUND) / 4
    center = (BMS_UPPER_BOUND + BMS_LOWER_BOUND) / 2
    shift = rng.uniform(center - half_width, center + half_width, dimension)
    permutation = rng.permutation(dimension)

    s1, s2, s3, groups = [], [], [], []
    terms, evaluators = [], []
    has_product = False
    start = 0

    for basis_name, units in segments:
        stop = start + units * unit
        params = {}

        if basis_name in ("prodsqu", "prodras"):
            params["exponent"] = 1.0 / (stop - start)
            has_product = True

        basis = make_basis(basis_name, params)
        evaluators.append((basis, start, stop))
        terms.append((basis_name, start, stop))

        members = permutation[start:stop].tolist()

        if basis.separability_class == CLASS_ADDITIVE:
            s1.extend(members)
        elif basis.separability_class == CLASS_MULTIPLICATIVE:
            s2.extend(members)
        elif basis.separability_class == CLASS_COMPOSITE:
            s3.extend(members)
            _one_sided_shift(shift, members, center, half_width)
        else:
            groups.append(members)

        start = stop

    rotation_blocks = []
    block_evaluators = []
    outer = None

    if block_spec is not None:
        block_basis, outer_name = block_spec
        outer = _OUTER[outer_name]
        n_blocks = (dimension - start) // block_size
        block_seeds = rng.integers(0, 2 ** 31 - 1, size=n_blocks)

        for k in range(n_blocks):
            b_start = start + k * block_size
            b_stop = b_start + block_size

            if block_basis == "rot_rast":
                rotation = random_rotation(block_size, int(block_seeds[k]))
                rotation_blocks.append(rotation)
                basis = make_basis(block_basis, {"rotation": rotation})
            else:
                basis = make_basis(block_basis)

            block_evaluators.append((basis, b_start, b_stop))
            terms.append((f"{outer_name}:{block_basis}", b_start, b_stop))
            groups.append(permutation[b_start:b_stop].tolist())

    def objective(x):
        z = (_np.asarray(x, dtype=float) - shift)[..., permutation]
        value = 0.0

        for basis, a, b in evaluators:
            value = value + basis(z[..., a:b])

        if block_evaluators:
            inner = 0.0
            for basis, a, b in block_evaluators:
                inner = inner + basis(z[..., a:b])
            value = value + outer(inner)

        return value

    ground_truth = GroupingResult(s1, s2, s3, groups)
    ground_truth.validate(dimension)

    problem = ObjectiveProblem(
        objective,
        _np.full(dimension, BMS_LOWER_BOUND),
        _np.full(dimension, BMS_UPPER_BOUND),
        vectorized=True,
        name=f"f{function_id}"
    )

    shift.flags.writeable = False
    permutation.flags.writeable = False

    return BmsInstance(
        function_id=function_id,
        dimension=dimension,
        seed=seed,
        shift=shift,
        permutation=permutation,
        rotation_blocks=rotation_blocks,
        ground_truth=ground_truth,
        problem=problem,
        block_size=block_size,
        terms=tuple(terms),
        minimum_value=1.0 if has_product else 0.0
    )
