"""Hamiltonian functions, Hamilton's equations and the named catalog.

All callables take ``y`` with shape ``(..., 2n)`` ordered ``(p, q)`` and a
time ``t`` broadcastable against ``y[..., 0]``; they broadcast over the
leading dimensions.  Hamilton's equations use the convention

    dp/dt = -dH/dq,    dq/dt = dH/dp,

i.e. ``ydot = -zeta0 @ grad H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DimensionError, InvalidParamsError, UnknownNameError
from .geometry import Layout
from .group import VelocityForcePower

__all__ = [
    "Hamiltonian",
    "make_hamiltonian",
    "catalog",
    "CATALOG_NAMES",
    "hamilton_rhs",
    "velocity_force_power",
    "gyration_oracle",
]

_EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """A Hamiltonian ``H(y, t)`` with its phase-space gradient and ``dH/dt``.

    Attributes
    ----------
    n : int
        Degrees of freedom.
    value, grad, time_derivative : callable
        ``(y, t) -> H``, ``(y, t) -> (dH/dp, dH/dq)``, ``(y, t) -> dH/dt``.
    separable : bool
        True when ``H = K(p) + V(q, t)``; required by Stormer-Verlet.
    autonomous : bool
        True when ``dH/dt`` vanishes identically.
    fd_gradient : bool
        True when ``grad`` or ``time_derivative`` is a finite-difference
        fallback (lower accuracy).
    """

    n: int
    value: Callable
    grad: Callable
    time_derivative: Callable
    separable: bool = False
    autonomous: bool = False
    name: str = "custom"
    params: Mapping = field(default_factory=dict)
    fd_gradient: bool = False

    def __call__(self, y, t=0.0):
        return self.value(y, t)

    @property
    def layout(self) -> Layout:
        return Layout(self.n)

    def check_point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (2 * self.n,):
            raise DimensionError(f"{self.name}: y must have trailing dimension {2 * self.n}, got {y.shape}")
        return y


def _fd_grad(value: Callable) -> Callable:
    def grad(y, t=0.0):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        for a in range(y.shape[-1]):
            h = _EPS_CBRT * np.maximum(1.0, np.abs(y[..., a]))
            yp = y.copy()
            ym = y.copy()
            yp[..., a] += h
            ym[..., a] -= h
            out[..., a] = (value(yp, t) - value(ym, t)) / (2.0 * h)
        return out
    return grad


def _fd_dt(value: Callable) -> Callable:
    def dt(y, t=0.0):
        t = np.asarray(t, dtype=float)
        h = _EPS_CBRT * np.maximum(1.0, np.abs(t))
        return (value(y, t + h) - value(y, t - h)) / (2.0 * h)
    return dt


def _zero_dt(y, t=0.0):
    y = np.asarray(y, dtype=float)
    return np.zeros(np.broadcast_shapes(y.shape[:-1], np.shape(t)))


def make_hamiltonian(value: Callable, n: int, grad: Callable | None = None,
                     time_derivative: Callable | None = None, *, autonomous: bool = False,
                     separable: bool = False, name: str = "custom",
                     params: Mapping | None = None) -> Hamiltonian:
    """Wrap user callables; a missing derivative falls back to central differences.

    The finite-difference step is ``eps**(1/3) * max(1, |x|)`` per coordinate
    and the resulting Hamiltonian has ``fd_gradient=True``.
    """
    Layout(n)
    fd = grad is None or (time_derivative is None and not autonomous)
    if time_derivative is None:
        time_derivative = _zero_dt if autonomous else _fd_dt(value)
    return Hamiltonian(
        n=n,
        value=value,
        grad=grad if grad is not None else _fd_grad(value),
        time_derivative=time_derivative,
        separable=separable,
        autonomous=autonomous,
        name=name,
        params=dict(params or {}),
        fd_gradient=fd,
    )


# --- catalog -----------------------------------------------------------------

_DEFAULTS = {
    "free": {"m": 1.0},
    "harmonic": {"m": 1.0, "k": 1.0},
    "linear_potential": {"m": 1.0, "f0": 1.0},
    "driven_oscillator": {"m": 1.0, "k": 1.0, "F0": 1.0, "omega": 1.0},
    "charged_uniform_B": {"m": 1.0, "charge": 1.0, "c": 1.0, "B": 1.0},
}
CATALOG_NAMES = tuple(_DEFAULTS)


def _split(y, n):
    return y[..., :n], y[..., n:]


def _resolve_params(name: str, params: Mapping | None) -> dict:
    merged = dict(_DEFAULTS[name])
    for key, val in (params or {}).items():
        if key not in merged:
            raise InvalidParamsError(f"{name}: unknown parameter {key!r} (allowed: {sorted(merged)})")
        merged[key] = val
    for key, val in merged.items():
        arr = np.asarray(val, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise InvalidParamsError(f"{name}: parameter {key} must be finite")
        merged[key] = float(arr) if arr.ndim == 0 else arr
    if merged["m"] <= 0:
        raise InvalidParamsError(f"{name}: mass must be positive, got {merged['m']}")
    if name == "charged_uniform_B" and merged["c"] <= 0:
        raise InvalidParamsError(f"{name}: c must be positive, got {merged['c']}")
    return merged


def catalog(name: str, params: Mapping | None = None, n: int | None = None) -> Hamiltonian:
    """Named Hamiltonian with analytic derivatives.

    ==================  =============================================  =================
    name                H(p, q, t)                                      parameters
    ==================  =============================================  =================
    free                p^2 / 2m                                        m
    harmonic            p^2 / 2m + k q^2 / 2                            m, k
    linear_potential    p^2 / 2m - f0 . q                               m, f0
    driven_oscillator   p^2 / 2m + k q^2 / 2 - F0 cos(omega t) . q      m, k, F0, omega
    charged_uniform_B   |p - (charge/c) A(q)|^2 / 2m, n = 2 only,       m, charge, c, B
                        A(q) = (-B q2 / 2, B q1 / 2)
    ==================  =============================================  =================

    ``f0`` and ``F0`` may be scalars or length-``n`` vectors.  ``n`` defaults
    to 1 (2 for ``charged_uniform_B``).
    """
    if name not in _DEFAULTS:
        raise UnknownNameError(f"unknown Hamiltonian {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    prm = _resolve_params(name, params)
    if name == "charged_uniform_B":
        if n is not None and n != 2:
            raise DimensionError(f"charged_uniform_B requires n=2, got n={n}")
        n = 2
    n = 1 if n is None else n
    Layout(n)
    m = prm["m"]

    for key in ("f0", "F0"):
        if key in prm and np.ndim(prm[key]) and np.shape(prm[key]) != (n,):
            raise InvalidParamsError(f"{name}: {key} must be a scalar or have length {n}")

    def kinetic_grad(p):
        return p / m

    if name == "free":
        def value(y, t=0.0):
            p, _ = _split(np.asarray(y, dtype=float), n)
            return np.sum(p * p, axis=-1) / (2 * m)

        def grad(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return np.concatenate([kinetic_grad(p), np.zeros_like(q)], axis=-1)

        return Hamiltonian(n, value, grad, _zero_dt, True, True, name, prm)

    if name == "harmonic":
        k = prm["k"]

        def value(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return np.sum(p * p, axis=-1) / (2 * m) + 0.5 * k * np.sum(q * q, axis=-1)

        def grad(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return np.concatenate([kinetic_grad(p), k * q], axis=-1)

        return Hamiltonian(n, value, grad, _zero_dt, True, True, name, prm)

    if name == "linear_potential":
        f0 = np.broadcast_to(np.asarray(prm["f0"], dtype=float), (n,))

        def value(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return np.sum(p * p, axis=-1) / (2 * m) - q @ f0

        def grad(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return np.concatenate([kinetic_grad(p), np.broadcast_to(-f0, q.shape)], axis=-1)

        return Hamiltonian(n, value, grad, _zero_dt, True, True, name, prm)

    if name == "driven_oscillator":
        k, omega = prm["k"], prm["omega"]
        F0 = np.broadcast_to(np.asarray(prm["F0"], dtype=float), (n,))

        def value(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            return (np.sum(p * p, axis=-1) / (2 * m) + 0.5 * k * np.sum(q * q, axis=-1)
                    - np.cos(omega * np.asarray(t)) * (q @ F0))

        def grad(y, t=0.0):
            p, q = _split(np.asarray(y, dtype=float), n)
            drive = np.cos(omega * np.asarray(t, dtype=float))[..., None] * F0
            return np.concatenate([kinetic_grad(p), k * q - drive], axis=-1)

        def time_derivative(y, t=0.0):
            _, q = _split(np.asarray(y, dtype=float), n)
            return np.sum(q * F0, axis=-1) * omega * np.sin(omega * np.asarray(t, dtype=float))

        return Hamiltonian(n, value, grad, time_derivative, True, False, name, prm)

    # charged_uniform_B
    coupling = prm["charge"] / prm["c"]
    half_b = 0.5 * prm["B"]
    # dA_i/dq_j for A = (-B q2/2, B q1/2)
    dA = np.array([[0.0, -half_b], [half_b, 0.0]])

    def kinetic_momentum(y):
        p, q = _split(np.asarray(y, dtype=float), 2)
        return p - coupling * (q @ dA.T)

    def value(y, t=0.0):
        pi = kinetic_momentum(y)
        return np.sum(pi * pi, axis=-1) / (2 * m)

    def grad(y, t=0.0):
        pi = kinetic_momentum(y)
        return np.concatenate([pi / m, -coupling * (pi @ dA) / m], axis=-1)

    return Hamiltonian(2, value, grad, _zero_dt, False, True, name, prm)


# --- Hamilton's equations ----------------------------------------------------

def hamilton_rhs(H: Hamiltonian, y, t=0.0) -> np.ndarray:
    """``(dp/dt, dq/dt) = (-dH/dq, dH/dp)``."""
    y = H.check_point(y)
    g = H.grad(y, t)
    n = H.n
    return np.concatenate([-g[..., n:], g[..., :n]], axis=-1)


def velocity_force_power(H: Hamiltonian, y, t=0.0) -> VelocityForcePower:
    """``v = dH/dp``, ``f = -dH/dq``, ``r = dH/dt`` at a single point."""
    y = H.check_point(y)
    if y.ndim != 1:
        raise DimensionError("velocity_force_power takes a single point")
    g = H.grad(y, t)
    return VelocityForcePower(v=g[: H.n], f=-g[H.n:], r=float(H.time_derivative(y, t)))


def gyration_oracle(H: Hamiltonian, y) -> dict:
    """Closed-form gyration of ``charged_uniform_B``: speed, radius, period, centre.

    Radius is ``m |v| c / (charge B)`` and the guiding centre sits at
    ``q + (v_2, -v_1) / omega_c`` with ``omega_c = charge B / (m c)``.
    """
    if H.name != "charged_uniform_B":
        raise UnknownNameError("gyration_oracle applies to charged_uniform_B only")
    prm = H.params
    y = H.check_point(y)
    v = H.grad(y, 0.0)[:2]
    omega_c = prm["charge"] * prm["B"] / (prm["m"] * prm["c"])
    if omega_c == 0:
        raise InvalidParamsError("charge * B must be nonzero for gyration")
    speed = float(np.hypot(*v))
    q = y[2:]
    return {
        "speed": speed,
        "omega_c": float(omega_c),
        "radius": abs(speed / omega_c),
        "period": float(2 * np.pi / abs(omega_c)),
        "center": q + np.array([v[1], -v[0]]) / omega_c,
    }
