from ._sansde import SansdeConfig, Subcomponent, sansde_generation, reflect
from ._cc import (
    CcState,
    CooperativeCoevolution,
    partition_separables,
    random_subcomponents,
    cc_optimize
)
