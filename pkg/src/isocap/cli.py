"""Command-line interface.

Every command writes ``report.json``, ``report.csv`` and ``manifest.json``
into ``--out``.  Exit codes: 0 ok, 1 invalid input, 2 a verified inequality
failed, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalFailure, ShapeError

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    shapes: list = field(default_factory=list)
    seed: int | None = None
    c_d: float | None = None
    tolerances: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    timestamp: str = ""
    version: str = __version__
    argv: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# output helpers

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "{:.12g}".format(float(x))
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


class Output:
    def __init__(self, args, command: str):
        self.dir = Path(args.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(command, seed=getattr(args, "seed", None), c_d=getattr(args, "cd", None),
                                    timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"), argv=list(args.argv))

    def json(self, name: str, obj) -> None:
        write_json(self.dir / name, obj)
        self.manifest.outputs.append(str(self.dir / name))

    def csv(self, name: str, rows, columns) -> None:
        write_csv(self.dir / name, rows, columns)
        self.manifest.outputs.append(str(self.dir / name))

    def close(self) -> None:
        write_json(self.dir / "manifest.json", self.manifest.to_json())


# --------------------------------------------------------------------------
# config file

_TRUE, _FALSE = {"1", "true", "yes", "on"}, {"0", "false", "no", "off"}


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment and ``[section]`` lines are ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        if key not in actions:
            raise InputError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise InputError(f"config key {key!r} needs a boolean")
            defaults[key] = low in _TRUE
        elif act.nargs in ("+", "*"):
            defaults[key] = [act.type(v) if act.type else v for v in value.replace(",", " ").split()]
        else:
            defaults[key] = value  # argparse converts string defaults with the action's type
    sub.set_defaults(**defaults)


# --------------------------------------------------------------------------
# commands

def _mc(args, n=None):
    from .mc import MCConfig

    return MCConfig(args.seed, n or args.samples, args.workers)


def _shape(path):
    from .geometry import load_shape

    try:
        return load_shape(path)
    except OSError as exc:
        raise InputError(f"cannot read shape file {path}: {exc}") from exc


def _bounds_cfg(args):
    from .bounds import BoundsConfig

    return BoundsConfig(c_d=args.cd, t_max_factor=args.t_max_factor)


def _report_rows(rep) -> list[dict]:
    return [dict(r) for r in rep.rows()]


BOUND_COLUMNS = ["shape", "bound", "value", "reference", "stderr", "slack", "method", "seed"]


def _bound_reports(args, shapes, out: Output) -> int:
    from .bounds import bound_report
    from .capacity import reference_capacity
    from .mc import MCConfig

    if args.refined and args.cd is None:
        raise InputError("--refined needs --cd")
    cfg = _bounds_cfg(args)
    reports, rows, violated = [], [], False
    for k, shape in enumerate(shapes):
        mc = MCConfig(args.seed + k, args.samples, args.workers)
        asym_mc = MCConfig(args.seed + 10_000 + k, args.asym_samples, args.workers)
        ref = reference_capacity(shape, mc)
        rep = bound_report(shape, cfg, asym_mc, reference=ref, refined=bool(args.refined))
        reports.append(rep.to_json())
        rows += _report_rows(rep)
        bad = [name for name, ok in rep.dominance().items() if not ok]
        violated |= bool(bad)
        print(f"{rep.shape_id}: reference {fmt(ref.value)} ({ref.method})")
        for name, value in rep.bounds.items():
            print(f"  {name:20s} {fmt(value):>20s}  slack {fmt(rep.slack(name))}")
    out.json("report.json", {"reports": reports, "c_d": args.cd})
    out.csv("report.csv", rows, BOUND_COLUMNS)
    out.manifest.tolerances = {"quad_tol": cfg.quad_tol, "search_tol": cfg.search_tol,
                               "t_max_factor": cfg.t_max_factor}
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_bounds(args, out: Output) -> int:
    shape = _shape(args.shape)
    out.manifest.shapes = [args.shape]
    return _bound_reports(args, [shape], out)


def cmd_sweep(args, out: Output) -> int:
    from .corpus import build_corpus

    if args.shapes:
        shapes = [_shape(p) for p in args.shapes]
        out.manifest.shapes = list(args.shapes)
    else:
        shapes = [s for s in build_corpus(args.seed).all if s.dim >= 3]
        out.manifest.shapes = [f"corpus(seed={args.seed})"]
    return _bound_reports(args, shapes, out)


def cmd_capacity(args, out: Output) -> int:
    from .capacity import cap_ellipsoid, cap_exact, cap_hitting_mc, reference_capacity

    shape = _shape(args.shape)
    out.manifest.shapes = [args.shape]
    if args.method == "auto":
        est = reference_capacity(shape, _mc(args))
    elif args.method == "exact":
        est = cap_exact(shape)
    elif args.method == "quadrature":
        est = cap_ellipsoid(shape)
    else:
        est = cap_hitting_mc(shape, _mc(args))
    from .geometry import shape_label

    row = {"shape": shape_label(shape), "capacity": est.value, "stderr": est.stderr, "method": est.method,
           "seed": est.meta.get("seed", "")}
    print(f"{row['shape']}: capacity {fmt(est.value)} +- {fmt(est.stderr)} ({est.method})")
    out.json("report.json", {"shape": row["shape"], "capacity": est.to_json()})
    out.csv("report.csv", [row], ["shape", "capacity", "stderr", "method", "seed"])
    return EXIT_OK


def cmd_torsion(args, out: Output) -> int:
    from .geometry import shape_label
    from .torsion import torsion

    shape = _shape(args.shape)
    out.manifest.shapes = [args.shape]
    est = torsion(shape, _mc(args), method=args.method)
    row = {"shape": shape_label(shape), "torsion": est.value, "stderr": est.stderr, "method": est.method,
           "seed": est.meta.get("seed", "")}
    print(f"{row['shape']}: torsion {fmt(est.value)} +- {fmt(est.stderr)} ({est.method})")
    out.json("report.json", {"shape": row["shape"], "torsion": est.to_json()})
    out.csv("report.csv", [row], ["shape", "torsion", "stderr", "method", "seed"])
    return EXIT_OK


def cmd_functional(args, out: Output) -> int:
    from .geometry import shape_label
    from .torsion import ball_functional, functional

    shape = _shape(args.shape)
    out.manifest.shapes = [args.shape]
    if args.kind != "G" and args.alpha is None:
        raise InputError(f"{args.kind} needs --alpha")
    val = functional(args.kind, args.alpha, shape, _mc(args))
    ball = ball_functional(args.kind, args.alpha, shape.dim)
    row = {"shape": shape_label(shape), "kind": args.kind, "alpha": args.alpha, "value": val.value,
           "stderr": val.stderr, "ball_value": ball, "method": "exact" if val.stderr == 0 else "mc",
           "seed": args.seed}
    print(f"{row['shape']}: {args.kind}({fmt(args.alpha)}) = {fmt(val.value)} +- {fmt(val.stderr)}; ball {fmt(ball)}")
    out.json("report.json", row)
    out.csv("report.csv", [row], list(row))
    return EXIT_OK


def cmd_asymmetry(args, out: Output) -> int:
    from .fraenkel import asymmetry, isoperimetric_deficit
    from .geometry import shape_label

    shape = _shape(args.shape)
    out.manifest.shapes = [args.shape]
    res = asymmetry(shape, _mc(args, args.asym_samples), method=args.method)
    row = {"shape": shape_label(shape), "asymmetry": res.value, "stderr": res.stderr,
           "deficit": isoperimetric_deficit(shape), "method": args.method, "seed": args.seed}
    print(f"{row['shape']}: asymmetry {fmt(res.value)} +- {fmt(res.stderr)}, centre {[fmt(c) for c in res.center]}")
    out.json("report.json", {**row, "center": list(res.center), "n_samples": res.n_samples})
    out.csv("report.csv", [row], list(row))
    return EXIT_OK


def cmd_sausage(args, out: Output) -> int:
    from .sausage import SausageConfig, check_prop3, fit_slope, richardson, run_sausage

    if args.d < 3:
        raise InputError("sausage estimation needs --d >= 3")
    if args.check_bounds and args.d < 5:
        raise InputError("--check-bounds needs --d >= 5")
    try:
        cfg = SausageConfig(args.d, args.eps, args.seed, t_max=args.t_max, dt=args.dt, n_paths=args.paths,
                            n_points=args.points, estimator=args.estimator, workers=args.workers)
    except (ValueError, ShapeError) as exc:
        raise InputError(str(exc)) from exc
    run = run_sausage(cfg)
    slope, se = fit_slope(run)
    from .capacity import ball_capacity

    cap = ball_capacity(args.d, args.eps)
    summary = {"d": args.d, "eps": args.eps, "slope": slope, "stderr": se, "capacity": cap,
               "estimator": args.estimator, "n_paths": args.paths, "dt": args.dt, "t_max": args.t_max,
               "seed": args.seed, **run.meta}
    code = EXIT_OK
    if args.check_bounds:
        rep = check_prop3(run)
        summary["prop3"] = rep.to_json()
        code = EXIT_OK if rep.passed else EXIT_VIOLATION
    if args.halve_dt:
        fine = run_sausage(cfg.halved())
        dtc = richardson(run, fine)
        summary["dt_check"] = dtc.to_json()
        if not dtc.passed:
            code = max(code, EXIT_NUMERICAL)
    mean = run.volumes.mean(0)
    err = run.volumes.std(0, ddof=1) / math.sqrt(run.n_paths)
    rows = [{"t": t, "mean_volume": m, "stderr": e, "method": args.estimator, "seed": args.seed}
            for t, m, e in zip(run.t_grid, mean, err)]
    print(f"slope {fmt(slope)} +- {fmt(se)}; cap(B_eps) {fmt(cap)}")
    out.json("report.json", summary)
    out.csv("report.csv", rows, ["t", "mean_volume", "stderr", "method", "seed"])
    out.csv("paths.csv", run.rows(), ["path_id", "t", "volume", "stderr"])
    return code


def cmd_verify(args, out: Output) -> int:
    from .verify import SUITES, VerifyOptions, run_suite

    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    if args.suite == "dominance" and args.refined and args.cd is None:
        raise InputError("--refined needs --cd")
    opts = VerifyOptions(seed=args.seed, c_d=args.cd if (args.refined or args.suite != "dominance") else None,
                         alphas=tuple(args.alpha) if args.alpha else None, n_samples=args.samples,
                         asym_samples=args.asym_samples, workers=args.workers, sausage_paths=args.paths,
                         sausage_halving=not args.no_halving)
    res = run_suite(args.suite, opts)
    for c in res.failures:
        print(f"FAIL {c.name} [{c.shape}] value {fmt(c.value)} reference {fmt(c.reference)} {c.detail}")
    print(f"{args.suite}: {'PASS' if res.passed else 'FAIL'} ({len(res.checks) - len(res.failures)}"
          f"/{len(res.checks)} checks)")
    out.json("report.json", res.to_json())
    rows = [{**c.to_json(), "suite": args.suite, "seed": args.seed} for c in res.checks]
    out.csv("report.csv", rows, ["suite", "check", "shape", "value", "reference", "stderr", "passed", "seed"])
    return EXIT_OK if res.passed else EXIT_VIOLATION


# --------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, samples: int = 100_000) -> None:
    p.add_argument("--seed", type=int, default=0, help="root seed of every random stream")
    p.add_argument("--samples", type=int, default=samples, help="Monte Carlo walkers or points")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="key = value file of defaults; flags override")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    from .fraenkel import DEFAULT_SAMPLES

    parser = argparse.ArgumentParser(prog="isocap", description="Capacity, torsion and isoperimetric-type bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def bound_flags(p):
        p.add_argument("--cd", type=float, help="constant of the quantitative isoperimetric inequality")
        p.add_argument("--refined", action="store_true", help="add the asymmetry-refined bound (needs --cd)")
        p.add_argument("--t-max-factor", type=float, default=100.0,
                       help="perimeter integral truncation in diameters")
        p.add_argument("--asym-samples", type=int, default=DEFAULT_SAMPLES)

    p = subs["bounds"] = sub.add_parser("bounds", help="all capacity upper bounds for one shape")
    p.add_argument("shape", help="shape JSON file")
    bound_flags(p)
    _common(p)

    p = subs["sweep"] = sub.add_parser("sweep", help="bound reports for many shapes (default: built-in corpus)")
    p.add_argument("shapes", nargs="*")
    bound_flags(p)
    _common(p)

    p = subs["capacity"] = sub.add_parser("capacity", help="reference capacity")
    p.add_argument("shape")
    p.add_argument("--method", choices=["auto", "exact", "quadrature", "hitting"], default="auto")
    _common(p)

    p = subs["torsion"] = sub.add_parser("torsion", help="torsional rigidity")
    p.add_argument("shape")
    p.add_argument("--method", choices=["wos", "euler"], default="wos")
    _common(p)

    p = subs["functional"] = sub.add_parser("functional", help="G, G_alpha, H_alpha or J_alpha")
    p.add_argument("shape")
    p.add_argument("--kind", choices=["G", "G_alpha", "H_alpha", "J_alpha"], default="G")
    p.add_argument("--alpha", type=float)
    _common(p)

    p = subs["asymmetry"] = sub.add_parser("asymmetry", help="Fraenkel asymmetry")
    p.add_argument("shape")
    p.add_argument("--method", choices=["radial", "hit_or_miss"], default="radial")
    p.add_argument("--asym-samples", type=int, default=DEFAULT_SAMPLES)
    _common(p)

    p = subs["sausage"] = sub.add_parser("sausage", help="Wiener sausage volume growth of a ball")
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--paths", type=int, default=200)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--points", type=int, default=20_000, help="volume samples per path")
    p.add_argument("--estimator", choices=["bridge", "capsule", "hit_or_miss"], default="bridge")
    p.add_argument("--check-bounds", action="store_true", help="compare the slope with the d >= 5 bounds")
    p.add_argument("--halve-dt", action="store_true", help="rerun at dt/2 and compare slopes")
    _common(p)

    p = subs["verify"] = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite")
    p.add_argument("--cd", type=float)
    p.add_argument("--refined", action="store_true", help="dominance: include the asymmetry-refined bound")
    p.add_argument("--alpha", type=float, nargs="+", help="theorem3: exponents to test")
    p.add_argument("--asym-samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--paths", type=int, default=200, help="prop3: sausage paths")
    p.add_argument("--no-halving", action="store_true", help="prop3: skip the dt/2 rerun")
    _common(p)
    return parser, subs


COMMANDS = {"bounds": cmd_bounds, "sweep": cmd_sweep, "capacity": cmd_capacity, "torsion": cmd_torsion,
            "functional": cmd_functional, "asymmetry": cmd_asymmetry, "sausage": cmd_sausage,
            "verify": cmd_verify}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(subs[args.command], read_config(args.config))
            args = parser.parse_args(argv)
        args.argv = argv
        out = Output(args, args.command)
        try:
            return COMMANDS[args.command](args, out)
        finally:
            out.close()
    except SystemExit as exc:  # argparse: bad flags
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    except (InputError, ShapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
