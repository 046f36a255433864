"""Time-independent phase-space maps and how Hamiltonians transform under them.

Under a canonical change of coordinates ``y~ = rho(y)`` the Hamiltonian is
carried along as ``H~ = H o rho^-1`` (it is *not* an invariant function), and
trajectories correspond as ``phi~ = rho o phi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DimensionError, InvalidParamsError, InversionError, UnknownNameError
from .geometry import Layout
from .hamiltonians import Hamiltonian

__all__ = [
    "CanonicalMap",
    "linear_map",
    "builtin_canonical_maps",
    "CANONICAL_MAP_NAMES",
    "transform_hamiltonian",
]


@dataclass(frozen=True, eq=False)
class CanonicalMap:
    """A phase-space map with its inverse and Jacobian.

    ``forward`` and ``inverse`` act on arrays of shape ``(..., 2n)``;
    ``jacobian`` returns ``(..., 2n, 2n)``.  Nothing here asserts that the
    map is canonical; :func:`hsp.verify.verify_canonical_map` checks that.
    """

    n: int
    forward: Callable
    inverse: Callable
    jacobian: Callable
    name: str = "custom"
    params: Mapping = field(default_factory=dict)
    analytic_jacobian: bool = True
    preserves_separability: bool = False

    def __call__(self, y):
        return self.forward(y)


def linear_map(matrix, name: str = "linear", params: Mapping | None = None,
               preserves_separability: bool = False) -> CanonicalMap:
    """Constant-Jacobian map ``y -> M y``."""
    mat = np.array(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"matrix must be square, got {mat.shape}")
    lay = Layout.from_phase_dim(mat.shape[0])
    try:
        inv = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise InversionError(f"{name}: matrix is singular") from exc
    mat.setflags(write=False)
    inv.setflags(write=False)

    def forward(y):
        return np.asarray(y, dtype=float) @ mat.T

    def inverse(y):
        return np.asarray(y, dtype=float) @ inv.T

    def jacobian(y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(mat, y.shape[:-1] + mat.shape).copy()

    return CanonicalMap(lay.n, forward, inverse, jacobian, name, dict(params or {}), True,
                        preserves_separability)


CANONICAL_MAP_NAMES = ("identity", "scaling", "phase_rotation", "shear")


def builtin_canonical_maps(name: str, params: Mapping | None = None, n: int = 1) -> CanonicalMap:
    """Named linear canonical maps.

    * ``identity``
    * ``scaling`` (``lam != 0``): ``(p, q) -> (lam p, q / lam)``
    * ``phase_rotation`` (``theta``): rotates each ``(p_i, q_i)`` plane,
      ``p~ = p cos - q sin``, ``q~ = p sin + q cos``
    * ``shear`` (``g``): ``(p, q) -> (p, q + g p)``
    """
    params = dict(params or {})
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    allowed = {"identity": set(), "scaling": {"lam"}, "phase_rotation": {"theta"}, "shear": {"g"}}
    if name not in allowed:
        raise UnknownNameError(f"unknown canonical map {name!r}; choose from {', '.join(CANONICAL_MAP_NAMES)}")
    extra = set(params) - allowed[name]
    if extra:
        raise InvalidParamsError(f"{name}: unknown parameters {sorted(extra)}")
    lay = Layout(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))

    if name == "identity":
        return linear_map(np.eye(lay.dim), name, params, True)
    if name == "scaling":
        lam = float(params.get("lam", 2.0))
        if lam == 0 or not np.isfinite(lam):
            raise InvalidParamsError("scaling requires a finite nonzero lam")
        mat = np.block([[lam * eye, zero], [zero, eye / lam]])
        return linear_map(mat, name, {"lam": lam}, True)
    if name == "phase_rotation":
        theta = float(params.get("theta", 0.5))
        c, s = np.cos(theta), np.sin(theta)
        mat = np.block([[c * eye, -s * eye], [s * eye, c * eye]])
        return linear_map(mat, name, {"theta": theta})
    g = float(params.get("g", 1.0))
    mat = np.block([[eye, zero], [g * eye, eye]])
    return linear_map(mat, name, {"g": g})


def transform_hamiltonian(H: Hamiltonian, cmap: CanonicalMap) -> Hamiltonian:
    """``H~(y~, t) = H(rho^-1(y~), t)``.

    The gradient uses the chain rule with the map's Jacobian,
    ``grad H~ = J(y)^-T grad H(y)`` at ``y = rho^-1(y~)``.
    """
    if cmap.n != H.n:
        raise DimensionError(f"map acts on n={cmap.n} but H has n={H.n}")

    def pullback(y_tilde):
        y_tilde = H.check_point(y_tilde)
        y = cmap.inverse(y_tilde)
        if not np.all(np.isfinite(y)):
            raise InversionError(f"{cmap.name}: inverse is not finite at the requested point")
        return y

    def value(y_tilde, t=0.0):
        return H.value(pullback(y_tilde), t)

    def grad(y_tilde, t=0.0):
        y = pullback(y_tilde)
        jac = cmap.jacobian(y)
        g = H.grad(y, t)
        return np.linalg.solve(np.swapaxes(jac, -1, -2), g[..., None])[..., 0]

    def time_derivative(y_tilde, t=0.0):
        return H.time_derivative(pullback(y_tilde), t)

    return Hamiltonian(
        n=H.n,
        value=value,
        grad=grad,
        time_derivative=time_derivative,
        separable=H.separable and cmap.preserves_separability,
        autonomous=H.autonomous,
        name=f"{H.name}~{cmap.name}",
        params={"hamiltonian": dict(H.params), "map": cmap.name, "map_params": dict(cmap.params)},
        fd_gradient=H.fd_gradient or not cmap.analytic_jacobian,
    )
