"""Command-line entry point: ``hsp <command> [flags]``.

Exit codes: 0 all checks passed, 1 a mathematical check (or integration)
failed, 2 configuration/usage error.  Flags override values from
``--config FILE.json``, which override the built-in defaults; the merged
configuration is echoed into every output document.

Randomness uses numpy's PCG64 bit generator (``numpy.random.default_rng``)
seeded with ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import group as G
from .canonical import CANONICAL_MAP_NAMES, builtin_canonical_maps, transform_hamiltonian
from .errors import HSpError, NonseparableError, ConvergenceError
from .hamiltonians import CATALOG_NAMES, catalog
from .integrators import METHODS, integrate, trajectory_to_csv, trajectory_to_json
from .verify import (
    JacobianConfig,
    energy_audit,
    group_property_suites,
    gyration_check,
    reports_to_json,
    summarize,
    trajectory_correspondence,
    verify_flow_membership,
    verify_generator,
)

COMMANDS = ("group-check", "flow", "verify", "noncommute", "transform")

DEFAULTS = {
    "n": None,
    "seed": 0,
    "samples": 1000,
    "hamiltonian": None,
    "params": {},
    "method": "implicit_midpoint",
    "dt": 1e-3,
    "t0": 0.0,
    "t1": None,
    "y0": None,
    "tol_sym": 1e-6,
    "tol_deg": 1e-8,
    "tol_corr": 1e-6,
    "format": "csv",
    "out": None,
    "jobs": 1,
    "perturb": 0.0,
    "f": None,
    "v": None,
    "map": "scaling",
    "map_params": {},
}

# starting phase points used when --y0 is not given
_DEFAULT_Y0 = {
    "free": [1.0, 0.0],
    "harmonic": [0.0, 1.0],
    "linear_potential": [0.0, 0.0],
    "driven_oscillator": [0.0, 1.0],
    "charged_uniform_B": [1.0, 0.0, 0.0, 0.0],
}
# extra base points for the verify grid, as (y, e, t) offsets of the default
_GRID_SHIFTS = ([0.0, 0.0], [0.3, -0.2])


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    seed: int = 0
    samples: int = 1000
    hamiltonian: str | None = None
    params: dict = field(default_factory=dict)
    method: str = "implicit_midpoint"
    dt: float = 1e-3
    t0: float = 0.0
    t1: float | None = None
    y0: list | None = None
    tol_sym: float = 1e-6
    tol_deg: float = 1e-8
    tol_corr: float = 1e-6
    format: str = "csv"
    out: str | None = None
    jobs: int = 1
    perturb: float = 0.0
    f: list | None = None
    v: list | None = None
    map: str = "scaling"
    map_params: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.n is not None and (not isinstance(self.n, int) or self.n < 1):
            raise ConfigError(f"--n must be a positive integer, got {self.n}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("--seed must be an integer in [0, 2^64)")
        if self.samples < 1:
            raise ConfigError("--samples must be positive")
        if self.hamiltonian is not None and self.hamiltonian not in CATALOG_NAMES:
            raise ConfigError(f"unknown Hamiltonian {self.hamiltonian!r}; choose from {', '.join(CATALOG_NAMES)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not self.dt > 0:
            raise ConfigError("--dt must be positive")
        if self.t1 is not None and self.t1 < self.t0:
            raise ConfigError("--t1 must not be earlier than --t0")
        if self.command in ("flow", "transform") and self.t1 is not None and self.t1 == self.t0:
            raise ConfigError("--t1 must be later than --t0")
        for name in ("tol_sym", "tol_deg", "tol_corr"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"--{name.replace('_', '-')} must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if self.map not in CANONICAL_MAP_NAMES:
            raise ConfigError(f"unknown map {self.map!r}; choose from {', '.join(CANONICAL_MAP_NAMES)}")
        return self


# --- parsing -------------------------------------------------------------------

_KV = re.compile(r"\s*(\w+)\s*=\s*(\[[^\]]*\]|[^,]+)\s*(?:,|$)")


def parse_kv(text: str) -> dict:
    """``"m=1,k=2,f0=[1,2]"`` -> ``{"m": 1.0, "k": 2.0, "f0": [1.0, 2.0]}``."""
    out = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _KV.match(text, pos)
        if not mt:
            raise ConfigError(f"cannot parse parameters near {text[pos:]!r}")
        key, raw = mt.group(1), mt.group(2).strip()
        try:
            out[key] = [float(x) for x in raw[1:-1].split(",")] if raw.startswith("[") else float(raw)
        except ValueError as exc:
            raise ConfigError(f"parameter {key}: {exc}") from None
        pos = mt.end()
    return out


def parse_vector(text: str) -> list:
    try:
        return [float(x) for x in text.strip("[] ").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsp",
        description="Extended phase-space group HSp(2n): group checks, flows and Jacobian verification.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    s = argparse.SUPPRESS
    helps = {
        "group-check": "property suites over seeded random group elements",
        "flow": "integrate a catalog Hamiltonian and write the trajectory",
        "verify": "finite-difference Jacobian certification of flows and generators",
        "noncommute": "force/boost composition orders and their central discrepancy",
        "transform": "Hamiltonian under a canonical map and trajectory correspondence",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name], argument_default=s)
        p.add_argument("--config", help="JSON file with configuration keys (flags take precedence)")
        p.add_argument("--n", type=int, help="degrees of freedom (default: 2 for group-check, else from the Hamiltonian)")
        p.add_argument("--seed", type=int, help="PCG64 seed (default: 0)")
        p.add_argument("--samples", type=int, help="random elements per suite (default: 1000)")
        p.add_argument("--hamiltonian", help=f"one of {', '.join(CATALOG_NAMES)} "
                       "(default: harmonic; verify runs all)")
        p.add_argument("--params", type=parse_kv, help="Hamiltonian parameters k=v,... (default: catalog values)")
        p.add_argument("--method", help=f"one of {', '.join(METHODS)} (default: implicit_midpoint)")
        p.add_argument("--dt", type=float, help="step size (default: 1e-3)")
        p.add_argument("--t0", type=float, help="start time (default: 0)")
        p.add_argument("--t1", type=float, help="end time (default: 10 for flow, 5 for transform; "
                       "verify uses horizons 0.1 and 1 unless given)")
        p.add_argument("--y0", type=parse_vector, help="initial phase point p1..pn,q1..qn")
        p.add_argument("--tol-sym", dest="tol_sym", type=float, help="symplectic residual threshold (default: 1e-6)")
        p.add_argument("--tol-deg", dest="tol_deg", type=float, help="dt^2 residual threshold (default: 1e-8)")
        p.add_argument("--tol-corr", dest="tol_corr", type=float,
                       help="trajectory correspondence threshold for transform (default: 1e-6)")
        p.add_argument("--format", choices=("csv", "json"), help="trajectory file format (default: csv)")
        p.add_argument("--out", help="output file (default: none)")
        p.add_argument("--jobs", type=int, help="worker processes for verify (default: 1)")
        p.add_argument("--perturb", type=float, help="fault injection added to one matrix entry (default: 0)")
        p.add_argument("--f", type=parse_vector, help="force vector for noncommute (default: 1,0)")
        p.add_argument("--v", type=parse_vector, help="velocity vector for noncommute (default: 1,0)")
        p.add_argument("--map", help=f"canonical map for transform, one of {', '.join(CANONICAL_MAP_NAMES)} "
                       "(default: scaling)")
        p.add_argument("--map-params", dest="map_params", type=parse_kv,
                       help="map parameters k=v,... (default: lam=2 / theta=0.5 / g=1)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    given = vars(args).copy()
    command = given.pop("command")
    merged = dict(DEFAULTS)
    path = given.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(from_file, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(from_file)
    merged.update(given)
    return RunConfig(command=command, **merged).validate()


# --- commands --------------------------------------------------------------------

def _emit(doc: dict, cfg: RunConfig, text: str | None = None):
    payload = json.dumps(doc, indent=1, sort_keys=True)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(payload + "\n")
    print(text if text is not None else payload)


def _hamiltonian(cfg: RunConfig, default: str = "harmonic"):
    return catalog(cfg.hamiltonian or default, cfg.params, cfg.n)


def _initial_point(cfg: RunConfig, H) -> np.ndarray:
    if cfg.y0 is not None:
        y0 = np.asarray(cfg.y0, dtype=float)
        if y0.shape != (2 * H.n,):
            raise ConfigError(f"--y0 must have {2 * H.n} entries")
        return y0
    base = np.asarray(_DEFAULT_Y0[H.name], dtype=float)
    if base.size == 2 * H.n:
        return base
    return np.concatenate([np.full(H.n, base[0]), np.full(H.n, base[1])])


def cmd_group_check(cfg: RunConfig) -> int:
    n = cfg.n or 2
    suites = group_property_suites(n, cfg.samples, cfg.seed, cfg.perturb)
    ok = all(s["passed"] for s in suites)
    doc = {"command": cfg.command, "config": asdict(cfg), "n": n, "suites": suites, "passed": ok,
           "failed_suites": [s["suite"] for s in suites if not s["passed"]]}
    _emit(doc, cfg)
    return 0 if ok else 1


def cmd_flow(cfg: RunConfig) -> int:
    H = _hamiltonian(cfg)
    y0 = _initial_point(cfg, H)
    t1 = 10.0 if cfg.t1 is None else cfg.t1
    try:
        traj = integrate(H, y0, cfg.t0, t1, cfg.dt, cfg.method)
    except (NonseparableError, ConvergenceError) as exc:
        print(f"integration failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    energies = traj.energies(H)
    summary = {
        "rows": len(traj),
        "dt": traj.dt,
        "autonomous": H.autonomous,
        "max_abs_delta_H": float(np.max(np.abs(energies - energies[0]))),
        # H(t) - H(t0) should equal the accumulated explicit power e(t) - e(t0)
        "max_abs_energy_bookkeeping": float(np.max(np.abs(energies - energies[0] - (traj.e - traj.e[0])))),
        "energy_audit": energy_audit(H, traj).to_dict(),
    }
    if H.name == "charged_uniform_B":
        summary["gyration"] = gyration_check(H, traj)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            if cfg.format == "csv":
                trajectory_to_csv(traj, fh)
            else:
                fh.write(trajectory_to_json(traj, {"seed": cfg.seed, "config": asdict(cfg)}) + "\n")
    print(json.dumps({"command": cfg.command, "config": asdict(cfg), "summary": summary},
                     indent=1, sort_keys=True, default=float))
    return 0


def _verify_case(task):
    name, params, n, z, s, dt, method, tol_sym, tol_deg, perturb = task
    H = catalog(name, params, n)
    flow = verify_flow_membership(H, z, s, dt=dt, method=method, cfg=JacobianConfig(),
                                  tol_sym=tol_sym, tol_deg=tol_deg, perturb=perturb)
    flow.details.pop("jacobian", None)
    gen = verify_generator(H, z)
    gen.details.pop("generator", None)
    return [flow, gen]


def cmd_verify(cfg: RunConfig) -> int:
    names = [cfg.hamiltonian] if cfg.hamiltonian else list(CATALOG_NAMES)
    horizons = [0.1, 1.0] if cfg.t1 is None else [cfg.t1 - cfg.t0]
    tasks = []
    for name in names:
        H = catalog(name, cfg.params if cfg.hamiltonian else None, cfg.n if cfg.hamiltonian else None)
        y0 = _initial_point(cfg, H)
        for shift in _GRID_SHIFTS:
            y = y0 + np.repeat(shift, H.n)
            z = np.concatenate([y, [0.0, cfg.t0]])
            for s in horizons:
                tasks.append((name, dict(H.params), H.n, z, s, cfg.dt, cfg.method,
                              cfg.tol_sym, cfg.tol_deg, cfg.perturb))
    try:
        if cfg.jobs > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(_verify_case, tasks))
        else:
            results = [_verify_case(t) for t in tasks]
    except (NonseparableError, ConvergenceError) as exc:
        print(f"integration failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    reports = [r for pair in results for r in pair]
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(reports_to_json(reports) + "\n")
    summary = summarize(reports)
    print(json.dumps({"command": cfg.command, "config": asdict(cfg), "summary": summary},
                     indent=1, sort_keys=True, default=float))
    return 0 if summary["failed"] == 0 else 1


def cmd_noncommute(cfg: RunConfig) -> int:
    f = np.asarray(cfg.f if cfg.f is not None else [1.0, 0.0])
    v = np.asarray(cfg.v if cfg.v is not None else [1.0, 0.0])
    if f.shape != v.shape or f.size == 0:
        raise ConfigError("--f and --v must have the same nonzero length")
    if cfg.n is not None and f.size != cfg.n:
        raise ConfigError(f"--f/--v have length {f.size} but --n is {cfg.n}")
    n = f.size
    force = G.heisenberg(f=f, v=np.zeros(n))
    boost = G.heisenberg(f=np.zeros(n), v=v)
    fb, bf = G.compose(force, boost), G.compose(boost, force)
    disc = G.central_discrepancy(f, v)
    expected_mag = 2.0 * abs(float(f @ v))
    rows = []
    for a in (-2.0, -1.0, 0.5, 1.0, 3.0):
        for b in (-1.5, 1.0, 2.0):
            d_ab = G.central_discrepancy(a * f, b * v)
            rows.append({"a": a, "b": b, "discrepancy": d_ab, "a_b_discrepancy": a * b * disc,
                         "residual": abs(d_ab - a * b * disc)})
    scale = max(1.0, abs(disc)) * 6.0
    ok = abs(abs(disc) - expected_mag) <= 1e-14 * max(1.0, expected_mag) and all(
        r["residual"] <= 1e-13 * scale for r in rows)
    doc = {
        "command": cfg.command, "config": asdict(cfg),
        "force_then_boost": {"w": fb.w.tolist(), "r": fb.r},
        "boost_then_force": {"w": bf.w.tolist(), "r": bf.r},
        "central_discrepancy": disc, "two_abs_f_dot_v": expected_mag,
        "bilinearity": rows, "passed": bool(ok),
    }
    lines = [
        f"force f = {f.tolist()}   velocity v = {v.tolist()}",
        f"Y(f,0,0) Y(0,v,0): w = {fb.w.tolist()}  r = {fb.r:+.17g}",
        f"Y(0,v,0) Y(f,0,0): w = {bf.w.tolist()}  r = {bf.r:+.17g}",
        f"central discrepancy = {disc:+.17g}   2|f.v| = {expected_mag:.17g}",
        "",
        f"{'a':>6} {'b':>6} {'disc(af,bv)':>22} {'a*b*disc(f,v)':>22} {'residual':>10}",
    ]
    lines += [f"{r['a']:>6g} {r['b']:>6g} {r['discrepancy']:>22.15g} {r['a_b_discrepancy']:>22.15g} "
              f"{r['residual']:>10.2e}" for r in rows]
    lines.append("PASS" if ok else "FAIL")
    _emit(doc, cfg, "\n".join(lines))
    return 0 if ok else 1


def cmd_transform(cfg: RunConfig) -> int:
    H = _hamiltonian(cfg)
    cmap = builtin_canonical_maps(cfg.map, cfg.map_params, H.n)
    Ht = transform_hamiltonian(H, cmap)
    y0 = _initial_point(cfg, H)
    t1 = 5.0 if cfg.t1 is None else cfg.t1
    try:
        corr = trajectory_correspondence(H, cmap, y0, cfg.t0, t1, cfg.dt, cfg.method)
    except (NonseparableError, ConvergenceError) as exc:
        print(f"integration failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    grid = np.array([[-1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]])
    samples = np.concatenate([np.repeat(grid[:, :1], H.n, 1), np.repeat(grid[:, 1:], H.n, 1)], axis=1)
    table = [{"y_tilde": yt.tolist(), "H_tilde": float(Ht.value(yt, cfg.t0)), "H_same_args": float(H.value(yt, cfg.t0))}
             for yt in samples]
    ok = corr["max_deviation"] <= cfg.tol_corr
    doc = {"command": cfg.command, "config": asdict(cfg), "hamiltonian_table": table,
           "max_deviation": corr["max_deviation"], "tolerance": cfg.tol_corr, "passed": bool(ok)}
    lines = [f"H = {H.name} {dict(H.params)}   map = {cmap.name} {dict(cmap.params)}",
             f"{'y~':>24} {'H~(y~)':>22} {'H(y~)':>22}"]
    lines += [f"{str(r['y_tilde']):>24} {r['H_tilde']:>22.15g} {r['H_same_args']:>22.15g}" for r in table]
    lines.append(f"max |rho(phi(t)) - phi~(t)| over [{cfg.t0}, {t1}] = {corr['max_deviation']:.3e}"
                 f"  (tolerance {cfg.tol_corr:g})")
    lines.append("PASS" if ok else "FAIL")
    _emit(doc, cfg, "\n".join(lines))
    return 0 if ok else 1


_DISPATCH = {
    "group-check": cmd_group_check,
    "flow": cmd_flow,
    "verify": cmd_verify,
    "noncommute": cmd_noncommute,
    "transform": cmd_transform,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"hsp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except HSpError as exc:
        # bad names, parameters or dimensions supplied by the user
        print(f"hsp {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
