"""Finite-difference certification that maps and flows lie in HSp(2n).

Jacobians here are always computed by finite differences of the map itself,
never from the analytic gradients used to build it, so the checks are
independent of the code path they verify.  Mathematical failures are
reported (``passed=False``), never raised; only an inability to evaluate a
map raises.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import group as G
from .canonical import CanonicalMap, transform_hamiltonian
from .errors import DimensionError, HSpError, TooFewSamplesError
from .geometry import Layout, extended_invariance_residuals, max_abs, metric_forms, symplectic_residual
from .hamiltonians import Hamiltonian, hamilton_rhs
from .integrators import (
    SOLVER_TOL,
    Trajectory,
    extended_flow_map,
    flow_map,
    integrate,
    step_count,
    trajectory_diffeomorphism,
)

__all__ = [
    "JacobianConfig",
    "MapEvaluationError",
    "VerificationReport",
    "EnergyAudit",
    "fd_jacobian",
    "verify_jacobian",
    "verify_flow_membership",
    "verify_generator",
    "verify_canonical_map",
    "energy_audit",
    "trajectory_correspondence",
    "group_property_suites",
    "summarize",
    "reports_to_json",
    "gyration_check",
]

TOL_SYM = 1e-6
TOL_DEG = 1e-8
TOL_BLOCK = 1e-5


class MapEvaluationError(HSpError):
    pass


@dataclass(frozen=True)
class JacobianConfig:
    """Finite-difference settings: step ``h``, stencil, optional per-coordinate scaling.

    With ``per_coordinate_scaling`` the step along coordinate ``b`` is
    ``h * max(1, |z_b|)``.
    """

    h: float = 1e-4
    scheme: str = "central_4th"
    per_coordinate_scaling: bool = False

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if self.scheme not in ("central_2nd", "central_4th"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


LINEAR_MAP_CONFIG = JacobianConfig(h=1e-6, scheme="central_2nd")


@dataclass(eq=False)
class VerificationReport:
    """Outcome of one check; ``passed`` holds iff every residual is within its threshold."""

    check: str
    inputs: dict
    symplectic_residual: float
    degenerate_residual: float
    decomposition: object | None
    block_errors: dict
    passed: bool
    tolerances: dict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        residuals = {"symplectic": self.symplectic_residual, "degenerate": self.degenerate_residual}
        residuals.update(self.block_errors)
        out = {
            "check": self.check,
            "inputs": _jsonable(self.inputs),
            "residuals": _jsonable(residuals),
            "tolerances": _jsonable(self.tolerances),
            "passed": bool(self.passed),
        }
        dec = self.decomposition
        if isinstance(dec, G.HSpElement):
            out["decomposition"] = G.element_to_dict(dec)
        elif isinstance(dec, G.HspAlgebraElement):
            out["decomposition"] = {"s": dec.s.tolist(), "w": dec.w.tolist(), "r": dec.r}
        else:
            out["decomposition"] = None
        if self.details:
            out["details"] = _jsonable(self.details)
        return out


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


# --- Jacobians -----------------------------------------------------------------

def fd_jacobian(fmap: Callable, z, cfg: JacobianConfig = JacobianConfig(), *, vectorized: bool = True) -> np.ndarray:
    """Central-difference Jacobian ``[d fmap_a / d z_b]`` at ``z``.

    All stencil points are stacked into one ``(k, d)`` batch when
    ``vectorized`` is true; otherwise ``fmap`` is called per point.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise DimensionError(f"z must be 1-d, got shape {z.shape}")
    d = z.shape[0]
    steps = cfg.h * (np.maximum(1.0, np.abs(z)) if cfg.per_coordinate_scaling else np.ones(d))
    if cfg.scheme == "central_2nd":
        offsets, weights, denom = (1.0, -1.0), (1.0, -1.0), 2.0
    else:
        offsets, weights, denom = (2.0, 1.0, -1.0, -2.0), (-1.0, 8.0, -8.0, 1.0), 12.0

    pts = np.repeat(z[None, :], len(offsets) * d, axis=0)
    for i, off in enumerate(offsets):
        pts[i * d + np.arange(d), np.arange(d)] += off * steps
    try:
        if vectorized:
            vals = np.asarray(fmap(pts), dtype=float)
        else:
            vals = np.array([np.asarray(fmap(p), dtype=float) for p in pts])
    except HSpError:
        raise
    except Exception as exc:
        raise MapEvaluationError(f"map evaluation failed near {z.tolist()}: {exc}") from exc
    if vals.ndim != 2 or vals.shape[0] != pts.shape[0]:
        raise MapEvaluationError(f"map returned shape {vals.shape} for a batch of {pts.shape[0]} points")
    if not np.all(np.isfinite(vals)):
        raise MapEvaluationError(f"map returned non-finite values near {z.tolist()}")
    vals = vals.reshape(len(offsets), d, -1)
    jac = sum(w * vals[i] for i, w in enumerate(weights)) / denom
    return (jac / steps[:, None]).T


# --- checks -------------------------------------------------------------------

def verify_jacobian(j, tol_sym: float = TOL_SYM, tol_deg: float = TOL_DEG,
                    tol_block: float = TOL_BLOCK, *, check: str = "jacobian",
                    inputs: dict | None = None) -> VerificationReport:
    """Metric and line-element residuals plus the HSp block decomposition of ``j``."""
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise DimensionError(f"J must be square, got {j.shape}")
    lay = Layout.from_ext_dim(j.shape[0])
    sym, deg = extended_invariance_residuals(j, metric_forms(lay.n))
    blocks = G.block_residuals(j)
    details = {}
    try:
        dec = G.from_matrix(j, tol=tol_block)
    except HSpError as exc:
        dec = None
        details["decomposition_error"] = f"{type(exc).__name__}: {exc}"
    passed = sym <= tol_sym and deg <= tol_deg and dec is not None
    return VerificationReport(
        check=check,
        inputs=dict(inputs or {"n": lay.n}),
        symplectic_residual=sym,
        degenerate_residual=deg,
        decomposition=dec,
        block_errors=blocks,
        passed=bool(passed),
        tolerances={"symplectic": tol_sym, "degenerate": tol_deg, "block": tol_block},
        details=details,
    )


def _extended_point(H: Hamiltonian, z0) -> np.ndarray:
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2 * H.n + 2,):
        raise DimensionError(f"z0 must have shape ({2 * H.n + 2},), got {z0.shape}")
    return z0


def verify_flow_membership(H: Hamiltonian, z0, s: float, *, dt: float = 1e-3,
                           method: str = "implicit_midpoint", cfg: JacobianConfig = JacobianConfig(),
                           tol_sym: float = TOL_SYM, tol_deg: float = TOL_DEG, tol_block: float = TOL_BLOCK,
                           construction: str = "extended_flow", solver_tol: float = SOLVER_TOL,
                           perturb: float = 0.0) -> VerificationReport:
    """Certify that a flow-built diffeomorphism has its Jacobian in HSp(2n).

    ``construction="extended_flow"`` uses the time-``s`` map of the extended
    flow started at ``z0``; its phase block is additionally compared with the
    finite-difference Jacobian of the plain phase-space flow.

    ``construction="trajectory"`` uses ``(y, e, t) -> (phi_{t_ref -> t}(y),
    e + H(phi, t), t)`` with ``t_ref = z0.t - s``; its translation column is
    compared with the vector field at the image point (force, velocity) and
    its central entry with ``dH/dt`` there.

    ``perturb`` is added to the ``(0, 0)`` entry of the measured Jacobian
    before checking (fault injection for sensitivity tests).
    """
    z0 = _extended_point(H, z0)
    lay = Layout(H.n)
    inputs = {"hamiltonian": H.name, "params": dict(H.params), "z0": z0, "s": s, "dt": dt,
              "method": method, "h": cfg.h, "scheme": cfg.scheme, "construction": construction}
    extra = {}
    if construction == "extended_flow":
        fmap = extended_flow_map(H, s, dt, method, tol=solver_tol)
        j = fd_jacobian(fmap, z0, cfg)
        yflow = flow_map(H, z0[lay.t], s, dt, method, tol=solver_tol)
        sigma_ref = fd_jacobian(yflow, z0[lay.y], cfg)
        extra["sigma_vs_phase_flow"] = max_abs(j[lay.y, lay.y] - sigma_ref)
    elif construction == "trajectory":
        t_ref = z0[lay.t] - s
        n_steps = step_count(s, dt)
        if n_steps == 0:
            return verify_jacobian(np.eye(lay.ext_dim), tol_sym, tol_deg, tol_block,
                                   check="flow_membership", inputs=inputs)
        fmap = trajectory_diffeomorphism(H, t_ref, n_steps, method, tol=solver_tol)
        j = fd_jacobian(fmap, z0, cfg)
        image = fmap(z0)
        y_img, t_img = image[lay.y], image[lay.t]
        extra["w_vs_vector_field"] = max_abs(j[lay.y, lay.t] - hamilton_rhs(H, y_img, t_img))
        extra["r_vs_power"] = float(abs(j[lay.e, lay.t] - H.time_derivative(y_img, t_img)))
    else:
        raise ValueError(f"unknown construction {construction!r}")

    if perturb:
        j[0, 0] += perturb
        inputs["perturb"] = perturb
    rep = verify_jacobian(j, tol_sym, tol_deg, tol_block, check="flow_membership", inputs=inputs)
    rep.block_errors.update(extra)
    rep.passed = rep.passed and all(v <= tol_block for v in extra.values())
    rep.details["jacobian"] = j
    return rep


def _extended_field(H: Hamiltonian) -> Callable:
    lay = Layout(H.n)

    def field_(z):
        z = np.asarray(z, dtype=float)
        y, t = z[..., lay.y], z[..., lay.t]
        ydot = hamilton_rhs(H, y, t)
        edot = np.asarray(H.time_derivative(y, t), dtype=float)
        tdot = np.ones(z.shape[:-1])
        return np.concatenate([ydot, edot[..., None], tdot[..., None]], axis=-1)

    return field_


def verify_generator(H: Hamiltonian, z, tol: float = 1e-8,
                     cfg: JacobianConfig = JacobianConfig(h=1e-3, scheme="central_4th")) -> VerificationReport:
    """Check that the linearized extended vector field lies in the hsp algebra.

    ``X`` is the finite-difference Jacobian of ``(ydot, edot, tdot)`` at ``z``,
    i.e. the ``s``-derivative at ``s = 0`` of the extended flow Jacobian.  The
    residuals are ``max|X^T zeta + zeta X|`` and ``max|X^T eta0 + eta0 X|``.
    """
    z = _extended_point(H, z)
    forms = metric_forms(H.n)
    x = fd_jacobian(_extended_field(H), z, cfg)
    sym = max_abs(x.T @ forms.zeta + forms.zeta @ x)
    deg = max_abs(x.T @ forms.eta0 + forms.eta0 @ x)
    details = {"generator": x}
    try:
        dec = G.HspAlgebraElement.from_matrix(x, tol=max(tol, 10 * sym))
    except HSpError as exc:
        dec = None
        details["decomposition_error"] = str(exc)
    return VerificationReport(
        check="generator",
        inputs={"hamiltonian": H.name, "params": dict(H.params), "z": z, "h": cfg.h, "scheme": cfg.scheme},
        symplectic_residual=sym,
        degenerate_residual=deg,
        decomposition=dec,
        block_errors={},
        passed=bool(sym <= tol and deg <= tol and dec is not None),
        tolerances={"symplectic": tol, "degenerate": tol},
        details=details,
    )


def verify_canonical_map(cmap: CanonicalMap, sample_points, tol: float = 1e-10,
                         roundtrip_tol: float = 1e-9, jacobian_tol: float = TOL_BLOCK) -> VerificationReport:
    """Symplectic residual of ``cmap.jacobian`` at each sample point.

    Also records the forward/inverse round-trip error and the mismatch between
    the supplied Jacobian and a finite-difference Jacobian of ``forward``.
    """
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if pts.shape[1] != 2 * cmap.n:
        raise DimensionError(f"sample points must have {2 * cmap.n} columns, got {pts.shape}")
    forms = metric_forms(cmap.n)
    jacs = np.asarray(cmap.jacobian(pts))
    per_point = [symplectic_residual(j, forms) for j in jacs]
    roundtrip = max_abs(cmap.inverse(cmap.forward(pts)) - pts)
    fd_mismatch = max(max_abs(fd_jacobian(cmap.forward, p, LINEAR_MAP_CONFIG) - j) for p, j in zip(pts, jacs))
    sym = max(per_point)
    passed = sym <= tol and roundtrip <= roundtrip_tol and fd_mismatch <= jacobian_tol
    return VerificationReport(
        check="canonical_map",
        inputs={"map": cmap.name, "params": dict(cmap.params), "points": pts},
        symplectic_residual=sym,
        degenerate_residual=0.0,
        decomposition=None,
        block_errors={"roundtrip": roundtrip, "jacobian_vs_fd": fd_mismatch},
        passed=bool(passed),
        tolerances={"symplectic": tol, "roundtrip": roundtrip_tol, "jacobian_vs_fd": jacobian_tol},
        details={"per_point_symplectic": per_point},
    )


@dataclass(frozen=True)
class EnergyAudit:
    """Trapezoidal energy bookkeeping along a trajectory.

    ``kinetic = int v.dp``, ``work = -int f.dq``, ``power = int r dt``; the
    identity ``kinetic + work + power = delta_H`` holds up to ``O(dt^2)``.
    """

    kinetic: float
    work: float
    power: float
    delta_H: float
    residual: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def energy_audit(H: Hamiltonian, traj: Trajectory, tol: float = 1e-6) -> EnergyAudit:
    if len(traj) < 2:
        raise TooFewSamplesError("energy audit needs at least two samples")
    n = H.n
    g = H.grad(traj.y, traj.t)
    v, f = g[:, :n], -g[:, n:]
    r = np.asarray(H.time_derivative(traj.y, traj.t), dtype=float)
    dp = np.diff(traj.p, axis=0)
    dq = np.diff(traj.q, axis=0)
    dt = np.diff(traj.t)
    kinetic = float(np.sum(0.5 * (v[1:] + v[:-1]) * dp))
    work = float(-np.sum(0.5 * (f[1:] + f[:-1]) * dq))
    power = float(np.sum(0.5 * (r[1:] + r[:-1]) * dt))
    energies = traj.energies(H)
    delta = float(energies[-1] - energies[0])
    resid = abs(kinetic + work + power - delta)
    return EnergyAudit(kinetic, work, power, delta, resid, tol, bool(resid <= tol))


def trajectory_correspondence(H: Hamiltonian, cmap: CanonicalMap, y0, t0: float, t1: float,
                              dt: float, method: str = "implicit_midpoint") -> dict:
    """Integrate ``H`` from ``y0`` and ``H o rho^-1`` from ``rho(y0)``; compare ``rho(phi)`` with ``phi~``."""
    y0 = H.check_point(y0)
    Ht = transform_hamiltonian(H, cmap)
    traj = integrate(H, y0, t0, t1, dt, method)
    traj_t = integrate(Ht, cmap.forward(y0), t0, t1, dt, method)
    mapped = cmap.forward(traj.y)
    dev = np.max(np.abs(mapped - traj_t.y), axis=1)
    return {
        "max_deviation": float(dev.max()),
        "deviation": dev,
        "trajectory": traj,
        "transformed_trajectory": traj_t,
        "transformed_hamiltonian": Ht,
    }


# --- group property suites ------------------------------------------------------

def _suite(name, residuals, tol, samples):
    worst = float(max(residuals)) if len(residuals) else 0.0
    return {"suite": name, "max_residual": worst, "tolerance": tol, "samples": samples,
            "passed": bool(worst <= tol)}


def group_property_suites(n: int, samples: int = 1000, seed: int = 0, perturb: float = 0.0,
                          scale: float = 1.0) -> list[dict]:
    """Closure, associativity, inverse, normality and metric-invariance suites.

    Elements come from :func:`hsp.group.random_element` on one PCG64 stream
    seeded with ``seed``.  A nonzero ``perturb`` is added to the first entry of
    every realization matrix fed to the closure and metric-invariance suites
    (fault injection).
    """
    rng = np.random.default_rng(seed)
    forms = metric_forms(n)
    lay = Layout(n)
    els = [G.random_element(n, rng, scale) for _ in range(3 * samples)]
    a, b, c = els[:samples], els[samples:2 * samples], els[2 * samples:]
    eye = G.identity(n)

    def faulty(m):
        m = m.copy()
        m[0, 0] += perturb
        return m

    closure, matrix_law, assoc, inv, ident, normal_sigma, normal_closed, metric = ([] for _ in range(8))
    for g1, g2, g3 in zip(a, b, c):
        prod = G.compose(g1, g2)
        pm = faulty(G.to_matrix(g1) @ G.to_matrix(g2))
        try:
            closure.append(G.field_distance(G.from_matrix(pm, tol=1e-12 * max(1.0, max_abs(pm)) ** 2), prod))
        except HSpError:
            closure.append(np.inf)
        matrix_law.append(max_abs(G.to_matrix(prod) - G.to_matrix(g1) @ G.to_matrix(g2)))
        assoc.append(G.field_distance(G.compose(prod, g3), G.compose(g1, G.compose(g2, g3))))
        gi = G.inverse(g1)
        inv.append(max(G.field_distance(G.compose(g1, gi), eye), G.field_distance(G.compose(gi, g1), eye)))
        ident.append(max(G.field_distance(G.compose(g1, eye), g1), G.field_distance(G.compose(eye, g1), g1)))
        h = G.heisenberg_part(g3)
        conj = G.conjugate_heisenberg(g1, h)
        normal_sigma.append(max_abs(conj.sigma - np.eye(lay.dim)))
        normal_closed.append(G.field_distance(conj, G.conjugate_heisenberg_closed_form(g1, h)))
        for g in (g1, prod):
            metric.append(max(extended_invariance_residuals(faulty(G.to_matrix(g)), forms)))

    return [
        _suite("closure", closure, 1e-12, samples),
        _suite("matrix_law", matrix_law, 1e-13, samples),
        _suite("associativity", assoc, 1e-11, samples),
        _suite("identity", ident, 1e-12, samples),
        _suite("inverse", inv, 1e-12, samples),
        _suite("normality_sigma", normal_sigma, 1e-12, samples),
        _suite("normality_closed_form", normal_closed, 1e-11, samples),
        _suite("metric_invariance", metric, 1e-12, 2 * samples),
    ]


def summarize(reports: Iterable[VerificationReport]) -> dict:
    reports = list(reports)
    failed = [r for r in reports if not r.passed]
    return {
        "count": len(reports),
        "passed": len(reports) - len(failed),
        "failed": len(failed),
        "failed_checks": [f"{r.check}:{r.inputs.get('hamiltonian', r.inputs.get('map', ''))}" for r in failed],
        "max_symplectic_residual": max((r.symplectic_residual for r in reports), default=0.0),
        "max_degenerate_residual": max((r.degenerate_residual for r in reports), default=0.0),
    }


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True)


def gyration_check(H: Hamiltonian, traj: Trajectory, rtol: float = 1e-4) -> dict:
    """Compare integrated positions of ``charged_uniform_B`` with the closed-form orbit.

    Distances from the analytic guiding centre are measured at every sample
    and compared with ``m |v| c / (charge B)``; the speed is checked too.
    """
    from .hamiltonians import gyration_oracle

    oracle = gyration_oracle(H, traj.y[0])
    dist = np.linalg.norm(traj.q - oracle["center"], axis=1)
    speeds = np.linalg.norm(H.grad(traj.y, traj.t)[:, :2], axis=1)
    radius_err = float(np.max(np.abs(dist - oracle["radius"])) / oracle["radius"])
    speed_err = float(np.max(np.abs(speeds - oracle["speed"])) / oracle["speed"])
    return {
        "radius_oracle": oracle["radius"],
        "radius_measured_min": float(dist.min()),
        "radius_measured_max": float(dist.max()),
        "radius_rel_error": radius_err,
        "speed_rel_error": speed_err,
        "period": oracle["period"],
        "tolerance": rtol,
        "passed": bool(radius_err <= rtol and speed_err <= rtol),
    }
