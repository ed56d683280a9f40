"""Classical 2-valued strategic model checking engines.

Three engines share one compiled array representation of the game:

* perfect-information fixpoints (the workhorse),
* exact imperfect-information checking by uniform-strategy enumeration,
* sound lower/upper fixpoint approximations of imperfect information.

The one-step controllable-predecessor kernels have a numba-compiled path
and a pure-numpy fallback, selected by the MVATL_KERNEL environment
variable ("numba", "numpy", or "auto").
"""

from .compiled import CompiledGame
from .kernels import kernel_backend, set_kernel_backend
from .perfect import mc_atl_perfect, pre
from .imperfect import mc_atl_ir_approx, mc_atl_ir_exact

__all__ = [
    "CompiledGame",
    "kernel_backend",
    "set_kernel_backend",
    "mc_atl_perfect",
    "mc_atl_ir_approx",
    "mc_atl_ir_exact",
    "pre",
]
