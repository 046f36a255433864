"""The extended phase-space group HSp(2n) = Sp(2n) x| H(n) and its Lie algebra.

A group element is stored by its structured parameters ``(sigma, w, r)``:

* ``sigma``: a ``2n x 2n`` symplectic matrix,
* ``w = (f, v)``: force block (pairs with the p-rows) and velocity block
  (pairs with the q-rows),
* ``r``: the central (power) parameter.

The matrix realization acting on ``dz = (dp, dq, de, dt)`` is::

    [[ sigma,               0, w ],
     [ -w^T zeta0 sigma,    1, r ],
     [ 0,                   0, 1 ]]

and every sign convention below is what falls out of multiplying these
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from .errors import (
    DecompositionError,
    DimensionError,
    NotConnectedComponentError,
    NotHeisenbergError,
    NotOrthogonalError,
    NotSymplecticError,
    StructureError,
)
from .geometry import Layout, max_abs, metric_forms

__all__ = [
    "MEMBERSHIP_TOL",
    "HSpElement",
    "HspAlgebraElement",
    "VelocityForcePower",
    "identity",
    "make_element",
    "to_matrix",
    "from_matrix",
    "block_residuals",
    "compose",
    "inverse",
    "heisenberg",
    "symplectic_element",
    "rotation_element",
    "galilei_boost",
    "heisenberg_part",
    "symplectic_part",
    "conjugate_heisenberg",
    "conjugate_heisenberg_closed_form",
    "classify",
    "algebra_basis",
    "bracket",
    "exp_algebra",
    "random_algebra_element",
    "random_element",
    "central_discrepancy",
    "apply_differential",
    "field_distance",
    "element_to_dict",
    "element_from_dict",
]

MEMBERSHIP_TOL = 1e-10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HSpElement:
    """Structured element ``(sigma, w, r)`` of HSp(2n).

    Build through :func:`make_element` (which checks that ``sigma`` is
    symplectic) or one of the subgroup constructors.
    """

    sigma: np.ndarray
    w: np.ndarray
    r: float

    @property
    def n(self) -> int:
        return self.w.shape[0] // 2

    @property
    def f(self) -> np.ndarray:
        return self.w[: self.n]

    @property
    def v(self) -> np.ndarray:
        return self.w[self.n:]

    def matrix(self) -> np.ndarray:
        return to_matrix(self)

    def __matmul__(self, other):
        if isinstance(other, HSpElement):
            return compose(self, other)
        return NotImplemented

    def __repr__(self):
        return (f"HSpElement(n={self.n}, sigma={self.sigma.tolist()}, "
                f"w={self.w.tolist()}, r={self.r!r})")


@dataclass(frozen=True, eq=False)
class HspAlgebraElement:
    """Lie algebra element ``(s, w, r)``; ``s`` is infinitesimally symplectic.

    Its matrix realization is ``[[s, 0, w], [-w^T zeta0, 0, r], [0, 0, 0]]``.
    """

    s: np.ndarray
    w: np.ndarray
    r: float

    @property
    def n(self) -> int:
        return self.w.shape[0] // 2

    def matrix(self) -> np.ndarray:
        lay = Layout(self.n)
        forms = metric_forms(self.n)
        x = np.zeros((lay.ext_dim, lay.ext_dim))
        x[lay.y, lay.y] = self.s
        x[lay.y, lay.t] = self.w
        x[lay.e, lay.y] = -self.w @ forms.zeta0
        x[lay.e, lay.t] = self.r
        return x

    def __add__(self, other):
        return HspAlgebraElement(_frozen(self.s + other.s), _frozen(self.w + other.w),
                                 float(self.r + other.r))

    def __mul__(self, c):
        return HspAlgebraElement(_frozen(c * self.s), _frozen(c * self.w), float(c * self.r))

    __rmul__ = __mul__

    @classmethod
    def from_matrix(cls, x, tol: float = MEMBERSHIP_TOL) -> "HspAlgebraElement":
        """Split a realization back into ``(s, w, r)``.

        Raises :class:`DecompositionError` if ``x`` is not in the algebra.
        """
        x = np.asarray(x, dtype=float)
        lay = Layout.from_ext_dim(x.shape[0])
        forms = metric_forms(lay.n)
        s = x[lay.y, lay.y]
        w = x[lay.y, lay.t]
        r = x[lay.e, lay.t]
        errs = {
            "s_infinitesimally_symplectic": max_abs(s.T @ forms.zeta0 + forms.zeta0 @ s),
            "e_column": max_abs(x[:, lay.e]),
            "t_row": max_abs(x[lay.t, :]),
            "c_row": max_abs(x[lay.e, lay.y] + w @ forms.zeta0),
        }
        bad = {k: v for k, v in errs.items() if v > tol}
        if bad:
            raise DecompositionError(f"matrix is not in the hsp algebra: {bad}")
        return cls(_frozen(s), _frozen(w), float(r))


@dataclass(frozen=True)
class VelocityForcePower:
    """Velocity ``v``, force ``f`` and power ``r`` parameterizing a Heisenberg element."""

    v: np.ndarray
    f: np.ndarray
    r: float

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen(np.atleast_1d(self.v)))
        object.__setattr__(self, "f", _frozen(np.atleast_1d(self.f)))
        object.__setattr__(self, "r", float(self.r))
        if self.v.shape != self.f.shape or self.v.ndim != 1:
            raise DimensionError(f"v and f must be 1-d of equal length, got {self.v.shape}, {self.f.shape}")

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([self.f, self.v])

    @classmethod
    def from_element(cls, g: HSpElement) -> "VelocityForcePower":
        return cls(v=g.v, f=g.f, r=g.r)


# --- construction and matrix realization -----------------------------------

def identity(n: int) -> HSpElement:
    lay = Layout(n)
    return HSpElement(_frozen(np.eye(lay.dim)), _frozen(np.zeros(lay.dim)), 0.0)


def make_element(sigma, w=None, r: float = 0.0, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """Validate and freeze ``(sigma, w, r)``.

    Raises
    ------
    DimensionError
        Shapes are inconsistent.
    NotSymplecticError
        ``max|sigma^T zeta0 sigma - zeta0| > tol``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DimensionError(f"sigma must be square, got shape {sigma.shape}")
    lay = Layout.from_phase_dim(sigma.shape[0])
    w = np.zeros(lay.dim) if w is None else np.asarray(w, dtype=float)
    if w.shape != (lay.dim,):
        raise DimensionError(f"w must have shape ({lay.dim},), got {w.shape}")
    if not np.isfinite(sigma).all() or not np.isfinite(w).all() or not np.isfinite(r):
        raise StructureError("element parameters must be finite")
    forms = metric_forms(lay.n)
    res = max_abs(sigma.T @ forms.zeta0 @ sigma - forms.zeta0)
    if res > tol:
        raise NotSymplecticError(f"sigma is not symplectic: residual {res:.3g} > {tol:.3g}")
    return HSpElement(_frozen(sigma), _frozen(w), float(r))


def to_matrix(g: HSpElement) -> np.ndarray:
    lay = Layout(g.n)
    forms = metric_forms(g.n)
    m = np.zeros((lay.ext_dim, lay.ext_dim))
    m[lay.y, lay.y] = g.sigma
    m[lay.y, lay.t] = g.w
    m[lay.e, lay.y] = -g.w @ forms.zeta0 @ g.sigma
    m[lay.e, lay.e] = 1.0
    m[lay.e, lay.t] = g.r
    m[lay.t, lay.t] = 1.0
    return m


def block_residuals(m) -> dict[str, float]:
    """Residual of each structural condition defining a realization matrix.

    Keys: ``t_row`` (bottom row equals ``(0, ..., 0, 1)``), ``e_column``
    (e-column equals ``(0, ..., 1, 0)^T``), ``sigma_symplectic`` and
    ``c_row`` (e-row phase block equals ``-w^T zeta0 sigma``).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    lay = Layout.from_ext_dim(m.shape[0])
    forms = metric_forms(lay.n)
    sigma = m[lay.y, lay.y]
    w = m[lay.y, lay.t]

    t_row = m[lay.t].copy()
    t_row[lay.t] -= 1.0
    e_col = m[:, lay.e].copy()
    e_col[lay.e] -= 1.0
    return {
        "t_row": max_abs(t_row),
        "e_column": max_abs(e_col),
        "sigma_symplectic": max_abs(sigma.T @ forms.zeta0 @ sigma - forms.zeta0),
        "c_row": max_abs(m[lay.e, lay.y] + w @ forms.zeta0 @ sigma),
    }


def from_matrix(m, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """Recover ``(sigma, w, r)`` from a ``(2n+2)``-square matrix.

    Raises
    ------
    NotConnectedComponentError
        The ``(t, t)`` entry is ``-1`` (time reversal).
    StructureError
        Any of the zero/one block conditions fails.
    NotSymplecticError
        The phase block is not symplectic.
    """
    m = np.asarray(m, dtype=float)
    errs = block_residuals(m)
    lay = Layout.from_ext_dim(m.shape[0])
    if abs(m[lay.t, lay.t] + 1.0) <= tol:
        raise NotConnectedComponentError("time-reversing element (t-t entry -1) is outside the connected group")
    structural = {k: errs[k] for k in ("t_row", "e_column", "c_row") if errs[k] > tol}
    if errs["t_row"] > tol or errs["e_column"] > tol:
        raise StructureError(f"block structure violated: {structural}")
    if errs["sigma_symplectic"] > tol:
        raise NotSymplecticError(f"phase block not symplectic: residual {errs['sigma_symplectic']:.3g}")
    if errs["c_row"] > tol:
        raise StructureError(f"block structure violated: {structural}")
    return HSpElement(_frozen(m[lay.y, lay.y]), _frozen(m[lay.y, lay.t]), float(m[lay.e, lay.t]))


# --- group law ---------------------------------------------------------------

def _check_same_n(*gs):
    ns = {g.n for g in gs}
    if len(ns) != 1:
        raise DimensionError(f"elements have different n: {sorted(ns)}")


def compose(g1: HSpElement, g2: HSpElement) -> HSpElement:
    """Group product ``g1 * g2`` (matrix product of the realizations)."""
    _check_same_n(g1, g2)
    zeta0 = metric_forms(g1.n).zeta0
    sigma = g1.sigma @ g2.sigma
    w = g1.w + g1.sigma @ g2.w
    r = g1.r + g2.r - g1.w @ zeta0 @ g1.sigma @ g2.w
    return HSpElement(_frozen(sigma), _frozen(w), float(r))


def _symplectic_inverse(sigma: np.ndarray) -> np.ndarray:
    zeta0 = metric_forms(sigma.shape[0] // 2).zeta0
    return -zeta0 @ sigma.T @ zeta0


def inverse(g: HSpElement) -> HSpElement:
    sigma_inv = _symplectic_inverse(g.sigma)
    return HSpElement(_frozen(sigma_inv), _frozen(-sigma_inv @ g.w), -g.r)


def field_distance(a: HSpElement, b: HSpElement) -> float:
    """Max-abs difference over all of ``sigma``, ``w`` and ``r``."""
    _check_same_n(a, b)
    return max(max_abs(a.sigma - b.sigma), max_abs(a.w - b.w), abs(a.r - b.r))


# --- subgroups ---------------------------------------------------------------

def heisenberg(f=None, v=None, r: float = 0.0) -> HSpElement:
    """Weyl-Heisenberg element with force ``f``, velocity ``v`` and power ``r``.

    ``f`` may also be a :class:`VelocityForcePower`.  Acting on differentials::

        dp~ = dp + f dt
        dq~ = dq + v dt
        de~ = de + v.dp - f.dq + r dt
        dt~ = dt
    """
    if isinstance(f, VelocityForcePower):
        vfp = f
        f, v, r = vfp.f, vfp.v, vfp.r
    if f is None and v is None:
        raise DimensionError("at least one of f, v is needed to fix n")
    f = np.atleast_1d(np.asarray(f if f is not None else np.zeros_like(np.atleast_1d(v), dtype=float), dtype=float))
    v = np.atleast_1d(np.asarray(v if v is not None else np.zeros_like(f), dtype=float))
    if f.shape != v.shape or f.ndim != 1:
        raise DimensionError(f"f and v must be 1-d of equal length, got {f.shape}, {v.shape}")
    n = f.shape[0]
    return HSpElement(_frozen(np.eye(2 * n)), _frozen(np.concatenate([f, v])), float(r))


def symplectic_element(sigma, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    return make_element(sigma, None, 0.0, tol)


def _is_orthogonal(rot: np.ndarray, tol: float) -> bool:
    return max_abs(rot.T @ rot - np.eye(rot.shape[0])) <= tol


def rotation_element(rot, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """``sigma = diag(R, R)`` for an orthogonal ``R`` acting on p and q alike.

    Reflections are accepted (``diag(R, R)`` is still symplectic); see
    :func:`classify` for the ``special_orthogonal`` label.
    """
    rot = np.asarray(rot, dtype=float)
    if rot.ndim != 2 or rot.shape[0] != rot.shape[1]:
        raise DimensionError(f"R must be square, got {rot.shape}")
    if not _is_orthogonal(rot, tol):
        raise NotOrthogonalError(f"R is not orthogonal: residual {max_abs(rot.T @ rot - np.eye(rot.shape[0])):.3g}")
    n = rot.shape[0]
    sigma = np.zeros((2 * n, 2 * n))
    sigma[:n, :n] = rot
    sigma[n:, n:] = rot
    return make_element(sigma, None, 0.0, tol)


def galilei_boost(v) -> HSpElement:
    """Velocity boost: ``dq~ = dq + v dt``, ``de~ = de + v.dp``."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return heisenberg(f=np.zeros_like(v), v=v, r=0.0)


def heisenberg_part(g: HSpElement) -> HSpElement:
    return HSpElement(_frozen(np.eye(2 * g.n)), g.w, g.r)


def symplectic_part(g: HSpElement) -> HSpElement:
    return HSpElement(g.sigma, _frozen(np.zeros(2 * g.n)), 0.0)


def conjugate_heisenberg(g: HSpElement, h: HSpElement, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """``g h g^-1`` for a Heisenberg ``h``; the result is again Heisenberg."""
    _check_same_n(g, h)
    if max_abs(h.sigma - np.eye(2 * h.n)) > tol:
        raise NotHeisenbergError("h must have sigma equal to the identity")
    return compose(compose(g, h), inverse(g))


def conjugate_heisenberg_closed_form(g: HSpElement, h: HSpElement) -> HSpElement:
    """Same as :func:`conjugate_heisenberg`, from the closed-form automorphism.

    ``(w, r) -> (S w, r + (S w)^T zeta0 w' - w'^T zeta0 S w)`` with
    ``g = (S, w', r')``.
    """
    _check_same_n(g, h)
    zeta0 = metric_forms(g.n).zeta0
    sw = g.sigma @ h.w
    r = h.r + sw @ zeta0 @ g.w - g.w @ zeta0 @ sw
    return HSpElement(_frozen(np.eye(2 * g.n)), _frozen(sw), float(r))


def classify(g: HSpElement, tol: float = MEMBERSHIP_TOL) -> dict[str, bool]:
    """Subgroup labels for ``g``.

    ``rotation`` means ``sigma = diag(R, R)`` with ``R`` orthogonal;
    ``special_orthogonal`` additionally requires ``det R = +1``; ``inertial``
    means a rotation combined with a pure velocity boost (``f = r = 0``).
    """
    n = g.n
    eye = np.eye(2 * n)
    is_symplectic = max_abs(g.w) <= tol and abs(g.r) <= tol
    is_heis = max_abs(g.sigma - eye) <= tol
    rot = g.sigma[:n, :n]
    is_rot = (max_abs(g.sigma[:n, n:]) <= tol and max_abs(g.sigma[n:, :n]) <= tol
              and max_abs(g.sigma[n:, n:] - rot) <= tol and _is_orthogonal(rot, tol))
    is_so = is_rot and np.linalg.det(rot) > 0
    boost_only = max_abs(g.f) <= tol and abs(g.r) <= tol
    return {
        "symplectic": bool(is_symplectic),
        "heisenberg": bool(is_heis),
        "rotation": bool(is_rot),
        "special_orthogonal": bool(is_so),
        "inertial": bool(is_rot and boost_only),
    }


# --- Lie algebra -------------------------------------------------------------

def algebra_basis(n: int) -> list[HspAlgebraElement]:
    """Generators ``W_1 .. W_2n`` followed by the central ``U``."""
    lay = Layout(n)
    zero_s = _frozen(np.zeros((lay.dim, lay.dim)))
    basis = [HspAlgebraElement(zero_s, _frozen(np.eye(lay.dim)[a]), 0.0) for a in range(lay.dim)]
    basis.append(HspAlgebraElement(zero_s, _frozen(np.zeros(lay.dim)), 1.0))
    return basis


def bracket(x: HspAlgebraElement, y: HspAlgebraElement) -> HspAlgebraElement:
    """Matrix commutator ``XY - YX``, decomposed back into ``(s, w, r)``."""
    if x.n != y.n:
        raise DimensionError(f"algebra elements have different n: {x.n}, {y.n}")
    a, b = x.matrix(), y.matrix()
    scale = max(1.0, max_abs(a)) * max(1.0, max_abs(b))
    return HspAlgebraElement.from_matrix(a @ b - b @ a, tol=1e-12 * scale)


def exp_algebra(x: HspAlgebraElement, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """Group element ``exp(X)``.

    With ``s == 0`` the realization is nilpotent of order two (``w^T zeta0 w``
    vanishes), so the exponential is exactly the Heisenberg element with the
    same ``(w, r)``.  Otherwise a Pade scaling-and-squaring exponential is
    used and decomposed with :func:`from_matrix`.
    """
    if not np.any(x.s):
        return HSpElement(_frozen(np.eye(2 * x.n)), x.w, float(x.r))
    m = expm(x.matrix())
    scale = max(1.0, max_abs(m)) ** 2
    return from_matrix(m, tol=tol * scale)


def random_algebra_element(n: int, rng: np.random.Generator, scale: float = 1.0) -> HspAlgebraElement:
    """Random algebra element with all coefficients uniform in ``[-scale, scale]``.

    ``s = zeta0 A / (2n)`` with ``A`` symmetric, which keeps the spectral
    norm of ``s`` at most ``scale`` in every dimension.
    """
    lay = Layout(n)
    forms = metric_forms(n)
    upper = rng.uniform(-scale, scale, size=(lay.dim, lay.dim))
    a = np.triu(upper) + np.triu(upper, 1).T
    s = forms.zeta0 @ a / lay.dim
    w = rng.uniform(-scale, scale, size=lay.dim)
    r = rng.uniform(-scale, scale)
    return HspAlgebraElement(_frozen(s), _frozen(w), float(r))


def random_element(n: int, seed=None, scale: float = 1.0) -> HSpElement:
    """Deterministic random group element: ``exp`` of :func:`random_algebra_element`.

    ``seed`` is an int (fed to numpy's PCG64 via ``default_rng``) or an
    existing ``Generator``.
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if scale == 0:
        return identity(n)
    return exp_algebra(random_algebra_element(n, rng, scale))


def central_discrepancy(f, v) -> float:
    """Central part of force-then-boost minus boost-then-force.

    The product ``heisenberg(f) * heisenberg(v)`` carries ``r = -f.v`` and the
    reverse order ``+f.v``, so the result is ``-2 f.v``.
    """
    f = np.atleast_1d(np.asarray(f, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if f.shape != v.shape:
        raise DimensionError(f"f and v must have equal shape, got {f.shape}, {v.shape}")
    force = heisenberg(f=f, v=np.zeros_like(v))
    boost = heisenberg(f=np.zeros_like(f), v=v)
    return compose(force, boost).r - compose(boost, force).r


def apply_differential(g: HSpElement, dz) -> np.ndarray:
    """``to_matrix(g) @ dz``; ``dz`` may carry leading batch dimensions."""
    dz = np.asarray(dz, dtype=float)
    size = 2 * g.n + 2
    if dz.shape[-1:] != (size,):
        raise DimensionError(f"dz must have trailing dimension {size}, got {dz.shape}")
    return dz @ to_matrix(g).T


# --- serialization -----------------------------------------------------------

def element_to_dict(g: HSpElement) -> dict:
    return {"n": g.n, "sigma": g.sigma.tolist(), "w": g.w.tolist(), "r": g.r}


def element_from_dict(d: Mapping, tol: float = MEMBERSHIP_TOL) -> HSpElement:
    """Inverse of :func:`element_to_dict`; ``sigma`` may be nested or flat row-major."""
    n = int(d["n"])
    sigma = np.asarray(d["sigma"], dtype=float).reshape(2 * n, 2 * n)
    return make_element(sigma, d["w"], float(d["r"]), tol)
