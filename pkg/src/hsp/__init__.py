"""Extended phase-space symmetry group HSp(2n) and flow-Jacobian verification.

The package realizes the group ``Sp(2n) x| H(n)`` as ``(2n+2)``-square
matrices acting on ``(p, q, e, t)``, integrates Hamiltonian flows on the
extended space, and certifies numerically that flow Jacobians keep the
symplectic form ``dp ^ dq - de ^ dt`` and the line element ``dt^2``.
"""
from .errors import *  # noqa: F401,F403
from .geometry import *  # noqa: F401,F403
from .group import *  # noqa: F401,F403
from .hamiltonians import *  # noqa: F401,F403
from .canonical import *  # noqa: F401,F403
from .integrators import *  # noqa: F401,F403
from .verify import *  # noqa: F401,F403

__version__ = "0.1.0"
