from ._basis import BasisFunction, make_basis, BASIS_NAMES
from ._bms import BmsInstance, build_bms, random_rotation
from ._fig1 import fig1_example
