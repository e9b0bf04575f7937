"""Command-line front end.

    nodeglue central --m 3 [--mesh graphs.obj] [--grid 32]
    nodeglue lemma1  --m 3 [--step 1e-6]
    nodeglue tower   --schedule minimal --steps 10 [--out growths.csv]
    nodeglue hurwitz --t 0.01
    nodeglue figure  --m 3 --t 0.05 --mesh sketch.obj

Every command prints one line per check and can write a JSON report with
--json (use "-" for stdout).  Settings may also come from a key=value file
given with --config; flags win over the file.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or precondition
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .equations import ParameterVector, full_residual, horizontal_A, summation_identity
from .errors import NodeGlueError, NoisyJacobianError, NumericFailureError, ScheduleError, TrackingError
from .gluing import (
    build_components,
    central_configuration,
    growth_vector,
    limit_potential,
    node_residue_mismatch,
)
from .hurwitz import (
    CUBE_ROOT_OF_UNITY,
    CoveringLocalModel,
    branching_profile,
    f_t,
    g_t,
    isomorphic_profiles,
    marked_equal,
    same_branching_values,
)
from .complex_algebra import Polynomial
from .jacobian import jacobian_at_central
from .tower import Schedule, asymptotics, validate_schedule
from .weierstrass import AnnularGrid, GraphData, SurfaceMesh, catenoid, mesh_surface

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
M_CAP_CENTRAL = 24
M_CAP_LEMMA1 = 8


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# reports


@dataclass
class Check:
    name: str
    expected: object
    actual: object
    tol: float | None
    passed: bool


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    def add(self, name, expected, actual, tol=None, passed=None):
        if passed is None:
            passed = _close(expected, actual, tol)
        self.checks.append(Check(name, expected, actual, tol, bool(passed)))

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "checks": [
                {"name": c.name, "expected": c.expected, "actual": c.actual, "tol": c.tol, "pass": c.passed}
                for c in self.checks
            ],
            "notes": self.notes,
            "verdict": "pass" if self.verdict else "fail",
            "seconds": self.seconds,
        }


def _close(expected, actual, tol) -> bool:
    e = np.atleast_1d(np.asarray(expected, dtype=complex))
    a = np.atleast_1d(np.asarray(actual, dtype=complex))
    if e.shape != a.shape:
        return False
    return bool(np.all(np.abs(e - a) <= (tol if tol is not None else 0.0)))


def to_json(obj, indent: int = 0) -> str:
    """JSON text with sorted keys, 17 significant digits, complex as [re, im]."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {to_json(obj[k], indent + 1)}' for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if any(isinstance(x, dict) for x in seq):
            return "[\n" + ",\n".join(inner + to_json(x, indent + 1) for x in seq) + "\n" + pad + "]"
        return "[" + ", ".join(to_json(x, indent + 1) for x in seq) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_num(obj.real)}, {_num(obj.imag)}]"
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    s = str(obj).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def _num(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


# --------------------------------------------------------------------------
# meshes


def write_obj(path: Path, pieces: list[tuple[str, SurfaceMesh]]) -> None:
    """One object per piece, plus a parallel CSV with per-vertex channels."""
    path = Path(path)
    offset = 1
    with open(path, "w") as fh:
        for name, mesh in pieces:
            fh.write(f"o {name}\n")
            for v in mesh.vertices:
                fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
            for f in mesh.faces:
                fh.write(f"f {f[0] + offset} {f[1] + offset} {f[2] + offset}\n")
            offset += len(mesh.vertices)
    with open(path.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object", "vertex", "gauss_curvature", "height"])
        for name, mesh in pieces:
            for i, (k, h) in enumerate(zip(mesh.gauss_curvature, mesh.height)):
                w.writerow([name, i, format(k, ".17g"), format(h, ".17g")])


def _graph_mesh(cfg, side, grid: int, r_min=1.25, r_max=3.0) -> SurfaceMesh:
    u = limit_potential(cfg, side)
    data = GraphData(lambda z: float(u(z)), tuple(u.sites))
    return mesh_surface(data, AnnularGrid(r_min, r_max, grid, grid))


def _rescaled(mesh: SurfaceMesh, t: float, lift: float = 0.0) -> SurfaceMesh:
    v = mesh.vertices.copy()
    v[:, 0] *= -2 * t
    v[:, 1] *= -2 * t
    v[:, 2] += lift
    return SurfaceMesh(v, mesh.faces, mesh.gauss_curvature, mesh.height)


# --------------------------------------------------------------------------
# commands


def cmd_central(cfg: dict, rep: Report) -> None:
    m = cfg["m"]
    if not 2 <= m <= M_CAP_CENTRAL:
        raise UsageError(f"--m must lie in [2, {M_CAP_CENTRAL}]")
    tol = cfg["tol"]
    conf = central_configuration(m)
    comps = build_components(conf)
    res = full_residual(ParameterVector.central(m))
    for name, val in res.block_norms().items():
        rep.add(f"{name} vanishes", 0.0, val, tol)
    gv = growth_vector(conf, comps)
    rep.add("growth vector", [-1.0, 1 - m / (m - 1), m / (m - 1)], list(gv), 1e-10)
    rep.add("residue sum", 0.0, float(gv.sum()), 1e-10)
    rep.add("node residue matching", 0.0, node_residue_mismatch(conf, comps), 1e-10)
    rng = np.random.default_rng(0)
    z = rng.normal(size=20) * 2 + 1j * rng.normal(size=20) * 2
    closed = -1 / z + m * z ** (m - 1) / ((m - 1) * (z**m - 1))
    rel = float(np.max(np.abs(comps.g_minus(z) - closed) / np.abs(closed)))
    rep.add("g- closed form (relative)", 0.0, rel, 1e-10)
    d1 = float(np.max(np.abs(comps.phi3_minus.density(z) + comps.g_minus(z))))
    d2 = float(np.max(np.abs(comps.phi3_plus.density(z) - comps.g_plus(z))))
    rep.add("phi3 = -g- dz in C-", 0.0, d1, 1e-10)
    rep.add("phi3 = g+ dz in C+", 0.0, d2, 1e-10)
    s = complex(np.dot(conf.p_minus, horizontal_A(conf)))
    rep.add("sum p_i H^A_i", summation_identity(m, 1 / (m - 1)), s, 1e-9)
    if cfg.get("mesh"):
        pieces = [(f"u_{side}", _graph_mesh(conf, side, cfg["grid"])) for side in ("plus", "minus")]
        write_obj(Path(cfg["mesh"]), pieces)
        for name, mesh in pieces:
            rep.add(f"{name} vertex count", cfg["grid"] ** 2, len(mesh.vertices), 0)
        rep.notes.append(f"meshes written to {cfg['mesh']}")


def cmd_lemma1(cfg: dict, rep: Report) -> None:
    m = cfg["m"]
    if not 2 <= m <= M_CAP_LEMMA1:
        raise UsageError(f"--m must lie in [2, {M_CAP_LEMMA1}]")
    step = cfg["step"]
    if not step > 0:
        raise UsageError("--step must be positive")
    r = jacobian_at_central(m, step, cap=M_CAP_LEMMA1)
    norm = float(np.linalg.norm(r.jacobian, 2))
    for b in r.blocks:
        actual = b.largest_offblock_entry if "off-blocks" in b.block_name else b.smallest_singular_value
        tol = 1e-8 * norm if "off-blocks" in b.block_name else None
        rep.add(b.block_name, None, actual, tol, b.verdict)
    vb = r.block("dV/dgamma_dot")
    rep.add(
        "V block singular values (unconstrained coordinates)",
        sorted([2 * math.pi] * (m - 1) + [2.0] * (m - 1), reverse=True),
        list(vb.detail["unconstrained_singular_values"]),
        1e-6,
    )
    rep.add("V block singular values (symmetric slice)", None, list(vb.detail["singular_values"]), None, True)
    rep.add("kernel dimension", 5, r.kernel_dimension, 0)
    rep.add("full singular values", None, list(r.singular_values), None, True)
    rep.add("step-halving change", 0.0, r.step_change, 1e-3 * max(norm, 1.0))
    if step > 1e-4 or r.step_change > 1e-6 * max(norm, 1.0):
        rep.notes.append(
            f"warning: step {step:g} is coarse; Jacobian changes by {r.step_change:.3g} under step halving"
        )


def _parse_schedule(cfg: dict) -> tuple[Schedule, int]:
    text = cfg["schedule"]
    steps = cfg.get("steps")
    try:
        if text == "minimal" or text.startswith("geometric:"):
            N = steps or 10
            return Schedule.parse(text, N), N
        s = Schedule.parse(text, 0)
    except ValueError as e:
        raise UsageError(f"cannot parse schedule {text!r}: {e}") from e
    N = steps or s.last_index
    return s, N


def cmd_tower(cfg: dict, rep: Report) -> None:
    s, N = _parse_schedule(cfg)
    check = validate_schedule(s)
    if not check.valid:
        raise ScheduleError(f"invalid schedule at index {check.index}: {check.reason}", check.index)
    if N < 2:
        raise UsageError("--steps must be at least 2")
    a = asymptotics(s, N)
    rep.add("schedule valid", True, True, None, True)
    rep.add("m_n >= 2n - 1", True, check.meets_lower_bound, None, check.meets_lower_bound)
    rep.add("c_n(S_n)/sqrt(n) bounded", 1.6, float(a.sqrt_ratio.max()), None, a.sqrt_bound_ok)
    rep.add("curvature certificates exceed n - 1", True, a.certificates_ok, None, a.certificates_ok)
    rep.add("series verdict", None, a.series_verdict, None, True)
    rep.notes.append(a.series_detail)
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "m_n", "c_n_S_n", "curvature_certificate", "c_n_S_inf", "partial_sum"])
            for i, n in enumerate(a.n):
                w.writerow(
                    [
                        n,
                        s.m(n),
                        format(float(a.top_growth[i]), ".17g"),
                        format(float(a.certificates[i]), ".17g"),
                        format(a.limit_growths[i], ".17g"),
                        format(a.partial_sums[i], ".17g"),
                    ]
                )
        rep.notes.append(f"growths written to {cfg['out']}")


def cmd_hurwitz(cfg: dict, rep: Report) -> None:
    t = cfg["t"]
    if not 0 < t <= 0.5:
        raise UsageError("--t must lie in (0, 0.5]")
    expected = [0.0, 0.0, -27 * t**4]
    for name, h in (("f_t", f_t(t)), ("g_t", g_t(t))):
        vals = sorted(branching_profile(h).values, key=lambda v: (v.real, v.imag))
        rep.add(f"{name} critical values", sorted(expected), vals, 1e-10)
    rep.add("same branching values", True, same_branching_values(f_t(t), g_t(t)), None,
            same_branching_values(f_t(t), g_t(t)))
    iso = isomorphic_profiles(f_t(t), g_t(t))
    rep.add("profiles isomorphic", False, iso, None, not iso)
    j = CUBE_ROOT_OF_UNITY
    h1, h2 = Polynomial([0, t, 0, 1]), Polynomial([0, t * j, 0, 1])
    iso2 = isomorphic_profiles(h1, h2)
    rep.add("z^3+tz vs z^3+tjz profile-isomorphic", True, iso2, None, iso2)
    me = marked_equal(CoveringLocalModel(3, 0, (0, t)), CoveringLocalModel(3, 0, (0, t * j)))
    rep.add("z^3+tz vs z^3+tjz marked-equal", False, me, None, not me)
    rep.notes.append(f"the nonzero common branching value is -27 t^4 = {-27 * t**4:.6g}")


def cmd_figure(cfg: dict, rep: Report) -> None:
    m, t = cfg["m"], cfg["t"]
    if not 2 <= m <= M_CAP_CENTRAL:
        raise UsageError(f"--m must lie in [2, {M_CAP_CENTRAL}]")
    if not 0 < t < 0.5:
        raise UsageError("--t must lie in (0, 0.5)")
    if not cfg.get("mesh"):
        raise UsageError("figure needs --mesh")
    grid = cfg["grid"]
    cat = mesh_surface(catenoid(), AnnularGrid(0.5, 2.0, grid, grid))
    conf = central_configuration(m)
    top = float(cat.vertices[:, 2].max())
    plus = _rescaled(_graph_mesh(conf, "plus", grid), t, top)
    minus = _rescaled(_graph_mesh(conf, "minus", grid), t, top)
    write_obj(Path(cfg["mesh"]), [("catenoid", cat), ("limit_graph_minus", minus), ("limit_graph_plus", plus)])
    kmax = float(np.abs(cat.gauss_curvature).max())
    rep.add("catenoid max |K|", 1.0, kmax, 1e-3)
    rep.notes.append("illustrative sketch only: rescaled limit graphs, not an actual glued surface")


COMMANDS = {
    "central": cmd_central,
    "lemma1": cmd_lemma1,
    "tower": cmd_tower,
    "hurwitz": cmd_hurwitz,
    "figure": cmd_figure,
}

DEFAULTS = {
    "m": 3,
    "t": 0.01,
    "schedule": "minimal",
    "steps": None,
    "step": 1e-6,
    "grid": 32,
    "tol": 1e-9,
    "out": None,
    "mesh": None,
    "json": None,
    "no_timing": False,
}

TYPES = {"m": int, "t": float, "schedule": str, "steps": int, "step": float, "grid": int, "tol": float,
         "out": str, "mesh": str, "json": str}


def read_config(path: str) -> dict:
    """Parse a key=value document; '#' starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "no_timing":
            out[key] = value.lower() in ("1", "true", "yes")
            continue
        if key not in TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = TYPES[key](value)
        except ValueError as e:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from e
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nodeglue", description="Verification suites for the node-gluing construction.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key=value settings file; flags override it")
    p.add_argument("--m", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--schedule", help="'minimal', 'geometric:b' or a list like 3,5,7")
    p.add_argument("--steps", type=int, help="number of tower stages N")
    p.add_argument("--step", type=float, help="finite-difference step")
    p.add_argument("--grid", type=int, help="mesh samples per direction")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--mesh", help="OBJ output path")
    p.add_argument("--json", help="JSON report path, '-' for stdout")
    p.add_argument("--no-timing", action="store_true", default=None, help="write seconds = 0 for byte-identical reports")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if not cfg["tol"] > 0:
        raise UsageError("--tol must be positive")
    if cfg["grid"] < 2:
        raise UsageError("--grid must be at least 2")
    for k in ("out", "mesh"):
        if cfg[k] and not Path(cfg[k]).resolve().parent.is_dir():
            raise UsageError(f"--{k} directory does not exist")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    start = time.perf_counter()
    try:
        cfg = resolve_config(args)
        rep = Report(args.command, {k: v for k, v in cfg.items() if k != "json"})
        COMMANDS[args.command](cfg, rep)
    except (UsageError, ScheduleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NoisyJacobianError, NumericFailureError, TrackingError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except NodeGlueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    rep.seconds = 0.0 if cfg["no_timing"] else time.perf_counter() - start
    text = to_json(rep.as_dict())
    if cfg["json"] == "-":
        print(text)
    else:
        for c in rep.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {_short(c.actual)}")
        for n in rep.notes:
            print(f"note: {n}")
        print(f"verdict: {'pass' if rep.verdict else 'fail'} ({rep.seconds:.2f} s)")
        if cfg["json"]:
            Path(cfg["json"]).write_text(text + "\n")
    return EXIT_OK if rep.verdict else EXIT_FAIL


def _short(x) -> str:
    if isinstance(x, (list, tuple, np.ndarray)):
        x = list(x)
        body = ", ".join(_short(v) for v in x[:6])
        return f"[{body}{', ...' if len(x) > 6 else ''}]"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.6g}{x.imag:+.6g}i"
    if isinstance(x, (float, np.floating)):
        return f"{x:.6g}"
    return str(x)


if __name__ == "__main__":
    sys.exit(main())
