"""Fixed-step integration of Hamiltonian flows on extended phase space.

The state is ``(y, e, t)`` and the extended vector field is

    dy/dt' = -zeta0 grad H(y, t),    de/dt' = dH/dt (y, t),    dt/dt' = 1,

the Hamiltonian vector field of ``K(y, e, t) = H(y, t) - e`` for the
extended form ``dp ^ dq - de ^ dt``.  Its time-``s`` map therefore keeps both
the symplectic form and ``dt^2`` invariant, and a symplectic one-step method
applied to the whole extended system keeps that property exactly.

Methods
-------
implicit_midpoint
    Symmetric, symplectic, second order.  Stage equation solved by fixed-point
    iteration to ``tol`` with a Newton fallback when the iteration stalls.
stormer_verlet
    Kick-drift-kick for separable ``H = K(p) + V(q, t)``; the energy channel
    is kicked together with ``p``.
rk4
    Classical Runge-Kutta baseline (not symplectic).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DimensionError, NonseparableError, UnknownNameError
from .geometry import Layout
from .hamiltonians import Hamiltonian

__all__ = [
    "METHODS",
    "Trajectory",
    "integrate",
    "flow_map",
    "extended_flow_map",
    "trajectory_diffeomorphism",
    "evolve",
    "step_count",
    "trajectory_to_csv",
    "trajectory_to_json",
]

METHODS = ("implicit_midpoint", "stormer_verlet", "rk4")
SOLVER_TOL = 1e-13
MAX_ITER = 50
_STALL_RATIO = 0.9
_EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


def _rhs(H: Hamiltonian, y, t):
    g = H.grad(y, t)
    n = H.n
    return np.concatenate([-g[..., n:], g[..., :n]], axis=-1)


def _rhs_jacobian(H: Hamiltonian, y, t):
    """Central-difference Jacobian of the phase vector field, shape (m, 2n, 2n)."""
    m, d = y.shape
    jac = np.empty((m, d, d))
    for a in range(d):
        h = _EPS_CBRT * np.maximum(1.0, np.abs(y[:, a]))
        yp = y.copy()
        ym = y.copy()
        yp[:, a] += h
        ym[:, a] -= h
        jac[:, :, a] = (_rhs(H, yp, t) - _rhs(H, ym, t)) / (2.0 * h)[:, None]
    return jac


def _midpoint_step(H, y, e, t, h, tol, max_iter):
    tm = t + 0.5 * h
    hy = h[:, None]
    k = _rhs(H, y, t)
    scale = max(1.0, float(np.max(np.abs(y))))
    newton = False
    prev = math.inf
    for _ in range(max_iter):
        ym = y + 0.5 * hy * k
        if newton:
            resid = k - _rhs(H, ym, tm)
            dg = np.eye(y.shape[-1]) - 0.5 * hy[..., None] * _rhs_jacobian(H, ym, tm)
            k_new = k - np.linalg.solve(dg, resid[..., None])[..., 0]
        else:
            k_new = _rhs(H, ym, tm)
        change = float(np.max(np.abs(hy * (k_new - k))))
        k = k_new
        if change <= tol * scale:
            break
        if not newton and change > _STALL_RATIO * prev:
            newton = True
        prev = change
    else:
        raise ConvergenceError(
            f"implicit midpoint did not converge in {max_iter} iterations (last change {change:.3g})")
    ym = y + 0.5 * hy * k
    return y + hy * k, e + h * H.time_derivative(ym, tm)


def _verlet_step(H, y, e, t, h):
    n = H.n
    half = 0.5 * h
    hy = h[:, None]
    p, q = y[..., :n], y[..., n:]
    g = H.grad(y, t)
    p_half = p - 0.5 * hy * g[..., n:]
    e_half = e + half * H.time_derivative(y, t)
    y_half = np.concatenate([p_half, q], axis=-1)
    q_new = q + hy * H.grad(y_half, t)[..., :n]
    t_new = t + h
    y_new = np.concatenate([p_half, q_new], axis=-1)
    g_new = H.grad(y_new, t_new)
    p_new = p_half - 0.5 * hy * g_new[..., n:]
    e_new = e_half + half * H.time_derivative(y_new, t_new)
    return np.concatenate([p_new, q_new], axis=-1), e_new


def _rk4_step(H, y, e, t, h):
    def field(yy, tt):
        return _rhs(H, yy, tt), H.time_derivative(yy, tt)

    hy = h[:, None]
    k1, r1 = field(y, t)
    k2, r2 = field(y + 0.5 * hy * k1, t + 0.5 * h)
    k3, r3 = field(y + 0.5 * hy * k2, t + 0.5 * h)
    k4, r4 = field(y + hy * k3, t + h)
    return (y + hy / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4),
            e + h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4))


def _check_method(H: Hamiltonian, method: str):
    if method not in METHODS:
        raise UnknownNameError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "stormer_verlet" and not H.separable:
        raise NonseparableError(f"stormer_verlet needs a separable Hamiltonian; {H.name} is not")


def step_count(duration: float, dt: float) -> int:
    """Number of uniform steps of size at most ``dt`` covering ``|duration|``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if duration == 0:
        return 0
    return max(1, math.ceil(abs(duration) / dt * (1 - 1e-12)))


def evolve(H: Hamiltonian, y, e, t, duration, n_steps: int, method: str = "implicit_midpoint",
           *, tol: float = SOLVER_TOL, max_iter: int = MAX_ITER, record: bool = False):
    """Advance a batch of extended states by ``duration`` in ``n_steps`` equal steps.

    ``y`` has shape ``(m, 2n)``; ``e``, ``t`` and ``duration`` have shape
    ``(m,)`` or are scalars.  Times are recomputed as ``t + k h`` rather than
    accumulated.  With ``record=True`` returns arrays with a leading
    ``n_steps + 1`` axis, otherwise the final ``(y, e, t)``.
    """
    _check_method(H, method)
    y = np.array(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2 * H.n:
        raise DimensionError(f"y must have shape (m, {2 * H.n}), got {y.shape}")
    m = y.shape[0]
    e = np.broadcast_to(np.asarray(e, dtype=float), (m,)).copy()
    t_start = np.broadcast_to(np.asarray(t, dtype=float), (m,)).copy()
    duration = np.broadcast_to(np.asarray(duration, dtype=float), (m,))
    h = duration / n_steps if n_steps else np.zeros(m)

    if record:
        ys = np.empty((n_steps + 1, m, y.shape[1]))
        es = np.empty((n_steps + 1, m))
        ys[0], es[0] = y, e
    t_k = t_start
    for k in range(n_steps):
        if method == "implicit_midpoint":
            y, e = _midpoint_step(H, y, e, t_k, h, tol, max_iter)
        elif method == "stormer_verlet":
            y, e = _verlet_step(H, y, e, t_k, h)
        else:
            y, e = _rk4_step(H, y, e, t_k, h)
        t_k = t_start + (k + 1) * h
        if record:
            ys[k + 1], es[k + 1] = y, e
    t_end = t_start + duration
    if record:
        ts = t_start[None, :] + np.arange(n_steps + 1)[:, None] * h[None, :]
        ts[-1] = t_end
        return ys, es, ts
    return y, e, t_end


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution ``(t_k, y_k, e_k)``."""

    t: np.ndarray
    y: np.ndarray
    e: np.ndarray
    method: str
    dt: float
    hamiltonian: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.y.shape[1] // 2

    @property
    def p(self) -> np.ndarray:
        return self.y[:, : self.n]

    @property
    def q(self) -> np.ndarray:
        return self.y[:, self.n:]

    def __len__(self):
        return self.t.shape[0]

    def energies(self, H: Hamiltonian) -> np.ndarray:
        return np.asarray(H.value(self.y, self.t), dtype=float)


def integrate(H: Hamiltonian, y0, t0: float, t1: float, dt: float, method: str = "implicit_midpoint",
              *, e0: float = 0.0, tol: float = SOLVER_TOL, max_iter: int = MAX_ITER) -> Trajectory:
    """Integrate from ``t0`` to ``t1`` with uniform steps of at most ``dt``.

    The step actually used is ``(t1 - t0) / ceil((t1 - t0) / dt)`` and is
    stored on the trajectory.  ``e`` starts at ``e0`` and accumulates
    ``integral dH/dt dt`` with the same method.
    """
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    y0 = H.check_point(y0)
    if y0.ndim != 1:
        raise DimensionError("integrate takes a single initial point")
    n_steps = step_count(t1 - t0, dt)
    ys, es, ts = evolve(H, y0[None, :], e0, t0, t1 - t0, n_steps, method,
                        tol=tol, max_iter=max_iter, record=True)
    for a in (ts, ys, es):
        a.setflags(write=False)
    return Trajectory(ts[:, 0], ys[:, 0], es[:, 0], method, (t1 - t0) / n_steps, H.name, dict(H.params))


def _batched(fn: Callable, size: int) -> Callable:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (size,):
            raise DimensionError(f"expected trailing dimension {size}, got {x.shape}")
        lead = x.shape[:-1]
        out = fn(x.reshape(-1, size))
        return out.reshape(lead + (size,))
    return wrapped


def flow_map(H: Hamiltonian, t0: float, s: float, dt: float, method: str = "implicit_midpoint",
             *, tol: float = SOLVER_TOL) -> Callable:
    """Reusable map ``y -> phi_{t0 -> t0 + s}(y)`` (accepts batches)."""
    _check_method(H, method)
    n_steps = step_count(s, dt)

    def run(y):
        return evolve(H, y, 0.0, t0, s, n_steps, method, tol=tol)[0]

    return _batched(run, 2 * H.n)


def extended_flow_map(H: Hamiltonian, s: float, dt: float, method: str = "implicit_midpoint",
                      *, tol: float = SOLVER_TOL) -> Callable:
    """Time-``s`` map of the extended flow, ``(y, e, t) -> (phi(y), e + int dH/dt, t + s)``.

    The number of steps is fixed by ``s`` and ``dt`` alone, so the map is
    smooth in every coordinate including the start time.
    """
    _check_method(H, method)
    lay = Layout(H.n)
    n_steps = step_count(s, dt)

    def run(z):
        y, e, t = evolve(H, z[:, lay.y], z[:, lay.e], z[:, lay.t], s, n_steps, method, tol=tol)
        return np.column_stack([y, e, t])

    return _batched(run, lay.ext_dim)


def trajectory_diffeomorphism(H: Hamiltonian, t_ref: float, n_steps: int,
                              method: str = "implicit_midpoint", *, tol: float = SOLVER_TOL) -> Callable:
    """``(y, e, t) -> (phi_{t_ref -> t}(y), e + H(phi, t), t)``.

    ``y`` is read as the state at ``t_ref`` and carried to the time coordinate
    ``t`` in ``n_steps`` equal steps.  Its Jacobian has phase block
    ``d phi / d y``, translation column equal to the vector field (force,
    velocity) at the image point and central entry ``dH/dt`` there.
    """
    _check_method(H, method)
    lay = Layout(H.n)
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")

    def run(z):
        t = z[:, lay.t]
        y, _, _ = evolve(H, z[:, lay.y], 0.0, t_ref, t - t_ref, n_steps, method, tol=tol)
        e = z[:, lay.e] + H.value(y, t)
        return np.column_stack([y, e, t])

    return _batched(run, lay.ext_dim)


# --- export ------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_to_csv(traj: Trajectory, fh=None) -> str | None:
    """Write ``t,p1..pn,q1..qn,e`` rows with 17 significant digits.

    Returns the text when ``fh`` is None.
    """
    buf = io.StringIO() if fh is None else fh
    writer = csv.writer(buf, lineterminator="\n")
    n = traj.n
    writer.writerow(["t"] + [f"p{i + 1}" for i in range(n)] + [f"q{i + 1}" for i in range(n)] + ["e"])
    for t, y, e in zip(traj.t, traj.y, traj.e):
        writer.writerow([_fmt(t)] + [_fmt(v) for v in y] + [_fmt(e)])
    return buf.getvalue() if fh is None else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def trajectory_to_json(traj: Trajectory, metadata: dict | None = None) -> str:
    meta = {"method": traj.method, "dt": traj.dt, "hamiltonian": traj.hamiltonian,
            "params": traj.params, "n": traj.n}
    meta.update(metadata or {})
    doc = {
        "metadata": _jsonable(meta),
        "columns": ["t"] + [f"p{i + 1}" for i in range(traj.n)] + [f"q{i + 1}" for i in range(traj.n)] + ["e"],
        "t": traj.t.tolist(),
        "y": traj.y.tolist(),
        "e": traj.e.tolist(),
    }
    return json.dumps(doc, indent=1, sort_keys=True)
