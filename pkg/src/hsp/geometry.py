"""Symplectic and degenerate-time bilinear forms on extended phase space.

Coordinates are always ordered ``(p, q, e, t)``: ``n`` momenta, ``n``
positions, the energy coordinate and the time coordinate.  Every block index
used elsewhere in the package comes from :class:`Layout`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError

__all__ = [
    "Layout",
    "MetricForms",
    "metric_forms",
    "two_form_eval",
    "symplectic_residual",
    "extended_invariance_residuals",
    "max_abs",
]


@dataclass(frozen=True)
class Layout:
    """Index bookkeeping for ``n`` degrees of freedom."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DimensionError(f"n must be a positive integer, got {self.n!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def ext_dim(self) -> int:
        return 2 * self.n + 2

    @property
    def p(self) -> slice:
        return slice(0, self.n)

    @property
    def q(self) -> slice:
        return slice(self.n, 2 * self.n)

    @property
    def y(self) -> slice:
        return slice(0, 2 * self.n)

    @property
    def e(self) -> int:
        return 2 * self.n

    @property
    def t(self) -> int:
        return 2 * self.n + 1

    @classmethod
    def from_phase_dim(cls, dim: int) -> "Layout":
        if dim % 2 or dim < 2:
            raise DimensionError(f"phase-space dimension must be even and >= 2, got {dim}")
        return cls(dim // 2)

    @classmethod
    def from_ext_dim(cls, dim: int) -> "Layout":
        if dim % 2 or dim < 4:
            raise DimensionError(f"extended dimension must be even and >= 4, got {dim}")
        return cls((dim - 2) // 2)


@dataclass(frozen=True, eq=False)
class MetricForms:
    """The reduced symplectic matrix, its extension, and the time form.

    Attributes
    ----------
    zeta0 : ndarray, shape (2n, 2n)
        ``[[0, 1], [-1, 0]]`` in ``(p, q)`` blocks.
    zeta : ndarray, shape (2n+2, 2n+2)
        ``zeta0`` in the phase block plus ``-de ^ dt``.
    eta0 : ndarray, shape (2n+2, 2n+2)
        Zero except for a one in the ``(t, t)`` slot.
    """

    layout: Layout
    zeta0: np.ndarray = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    eta0: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.layout.n


@lru_cache(maxsize=None)
def _build_forms(n: int) -> MetricForms:
    lay = Layout(n)
    zeta0 = np.zeros((lay.dim, lay.dim), dtype=np.int64)
    zeta0[lay.p, lay.q] = np.eye(n, dtype=np.int64)
    zeta0[lay.q, lay.p] = -np.eye(n, dtype=np.int64)

    zeta = np.zeros((lay.ext_dim, lay.ext_dim), dtype=np.int64)
    zeta[lay.y, lay.y] = zeta0
    zeta[lay.e, lay.t] = -1
    zeta[lay.t, lay.e] = 1

    eta0 = np.zeros((lay.ext_dim, lay.ext_dim), dtype=np.int64)
    eta0[lay.t, lay.t] = 1

    arrays = [a.astype(float) for a in (zeta0, zeta, eta0)]
    for a in arrays:
        a.setflags(write=False)
    return MetricForms(lay, *arrays)


def metric_forms(n: int) -> MetricForms:
    """Return the (cached, read-only) form matrices for ``n`` degrees of freedom.

    Raises
    ------
    DimensionError
        If ``n < 1`` or not an integer.
    """
    Layout(n)
    return _build_forms(int(n))


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _as_vector(u, size: int, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (size,):
        raise DimensionError(f"{name} must have shape ({size},), got {u.shape}")
    return u


def _as_square(m, size: int, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (size, size):
        raise DimensionError(f"{name} must have shape ({size}, {size}), got {m.shape}")
    return m


def two_form_eval(forms: MetricForms, u, v) -> float:
    """Pair two extended tangent vectors with the symplectic form, ``u^T zeta v``."""
    size = forms.layout.ext_dim
    u = _as_vector(u, size, "u")
    v = _as_vector(v, size, "v")
    return float(u @ (forms.zeta @ v))


def symplectic_residual(m, forms: MetricForms) -> float:
    """Max-abs entry of ``M^T zeta0 M - zeta0``; zero iff ``M`` is symplectic."""
    m = _as_square(m, forms.layout.dim, "M")
    return max_abs(m.T @ forms.zeta0 @ m - forms.zeta0)


def extended_invariance_residuals(j, forms: MetricForms) -> tuple[float, float]:
    """Residuals of ``J^T zeta J = zeta`` and ``J^T eta0 J = eta0`` (max-abs)."""
    j = _as_square(j, forms.layout.ext_dim, "J")
    sym = max_abs(j.T @ forms.zeta @ j - forms.zeta)
    deg = max_abs(j.T @ forms.eta0 @ j - forms.eta0)
    return sym, deg
