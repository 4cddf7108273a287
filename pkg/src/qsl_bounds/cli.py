"""Command-line entry point: ``qsl controllability|bound|tightness|estimate SYSTEM.json``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 not controllable,
4 group kind without a tabulated diameter, 5 output failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import grape, lie_engine, speed_limit, tightness
from .lie_engine import GroupKind
from .matrix_core import DEFAULT_RANK_TOL
from .specfile import SpecError, parse_spec

log = logging.getLogger("qsl_bounds")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_CONTROLLABLE = 3
EXIT_UNCLASSIFIED = 4
EXIT_IO = 5

DEFAULT_TSTEPS = 40
DEFAULT_TMAX_FACTOR = 1.5


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliExit(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None
    try:
        system, kind_text = parse_spec(text)
    except SpecError as exc:
        raise CliExit(EXIT_PARSE, f"{path}: {exc}") from None
    return system, kind_text, text


def _resolve_kind(system, kind_text: str, override: str | None, k):
    text = override or kind_text
    if text.strip().lower() != "auto":
        try:
            return GroupKind.parse(text, system.n)
        except ValueError as exc:
            raise CliExit(EXIT_PARSE, f"bad kind {text!r}: {exc}") from None
    return lie_engine.classify_control_group(k, system.n)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot write {path}: {exc.strerror}") from None


def _out_dir(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot create {out}: {exc.strerror}") from None
    return out


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QSL_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliExit(EXIT_PARSE, f"QSL_SEED must be an integer, got {env!r}") from None
    return 0


def _write_manifest(out: Path, args, spec_text: str, extra: dict) -> None:
    manifest = {
        "command": args.command,
        "argv": list(args.argv),
        "version": package_version(),
        "system_sha256": hashlib.sha256(spec_text.encode()).hexdigest(),
        "started": args.started,
        "finished": datetime.now(timezone.utc).isoformat(),
        **extra,
    }
    try:
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot write manifest: {exc.strerror}") from None


def cmd_controllability(args) -> int:
    system, _, _ = _load(args.system)
    dim = len(lie_engine.dynamical_algebra(system, args.tol))
    full = system.n**2 - 1
    verdict = "controllable" if dim == full else "not controllable"
    print(f"dim {dim} of {full}: {verdict}")
    return EXIT_OK if dim == full else EXIT_NOT_CONTROLLABLE


def _analyse(system, kind, k, args):
    p = lie_engine.orthogonal_complement(k, system.n)
    try:
        return tightness.classify_tightness(system, kind, k, p, args.degeneracy_tol), p
    except RuntimeError as exc:
        log.error("%s", exc)
        return None, p


def cmd_bound(args) -> int:
    system, kind_text, spec_text = _load(args.system)
    k = lie_engine.control_algebra(system, args.tol)
    kind = _resolve_kind(system, kind_text, args.kind, k)
    if not kind.tabulated:
        if len(system.controls) == 1:
            drift = lie_engine.project_drift(system.drift, k)
            print(f"single-control bound: {speed_limit.single_control_bound(drift, system.n):.12g}")
        raise CliExit(EXIT_UNCLASSIFIED, "no tabulated diameter; supply kind or use grape estimate")
    try:
        report = speed_limit.qsl_bound(system, kind, k)
    except speed_limit.BoundError as exc:
        raise CliExit(EXIT_UNCLASSIFIED, str(exc)) from None
    verdict, _ = _analyse(system, kind, k, args)
    print(f"group:            {kind}")
    print(f"drift speed:      {report.drift_speed:.12g}")
    print(f"diameter:         {report.diameter:.12g}")
    print(f"bound:            {report.bound_theorem:.12g}")
    if report.bound_published is not None:
        print(f"published form:   {report.bound_published:.12g} (ratio {report.published_ratio:.6g})")
    if report.single_control is not None:
        print(f"single control:   {report.single_control:.12g}")
    print(f"tightness:        {verdict.status if verdict else 'unavailable'}")
    out = _out_dir(args.out_dir)
    if out is not None:
        _write_csv(
            out / "bound.csv",
            ["kind", "n", "drift_speed", "diameter", "bound_theorem", "bound_published", "single_control", "tightness"],
            [[str(kind), system.n, _fmt(report.drift_speed), _fmt(report.diameter), _fmt(report.bound_theorem),
              _fmt(report.bound_published), _fmt(report.single_control), verdict.status if verdict else ""]],
        )
        _write_manifest(out, args, spec_text, {"kind": str(kind), "tol": args.tol,
                                               "degeneracy_tol": args.degeneracy_tol})
    return EXIT_OK


def cmd_tightness(args) -> int:
    system, kind_text, _ = _load(args.system)
    k = lie_engine.control_algebra(system, args.tol)
    kind = _resolve_kind(system, kind_text, args.kind, k)
    verdict, p = _analyse(system, kind, k, args)
    print(f"group:            {kind}")
    print(f"dim k, dim p:     {len(k)}, {len(p)}")
    if kind.tag in ("SO", "Sp", "SU_pq"):
        dk, dp = lie_engine.algebra_dims(kind)
        print(f"tabulated dims:   {dk}, {dp}")
    if verdict is None:
        raise CliExit(EXIT_UNCLASSIFIED, "dimension criterion inconsistent; check tolerances")
    for r in verdict.reasons:
        body = ", ".join(f"{key}={val}" for key, val in r.items() if key != "criterion")
        print(f"  {r['criterion']}: {body}")
    print(f"verdict:          {verdict.status}")
    return EXIT_OK


def _estimate_grid(args, bound):
    tmax = args.tmax
    if tmax is None:
        if bound is None:
            raise CliExit(EXIT_UNCLASSIFIED, "no tabulated diameter; supply --kind or --tmax")
        tmax = DEFAULT_TMAX_FACTOR * bound
    step = args.tstep if args.tstep is not None else tmax / args.tsteps
    tmin = args.tmin if args.tmin is not None else step
    if step <= 0 or tmax < tmin or tmin <= 0:
        raise CliExit(EXIT_PARSE, "time grid must satisfy 0 < tmin <= tmax and step > 0")
    return grape.uniform_grid(tmin, tmax, step), step


def cmd_estimate(args) -> int:
    system, kind_text, spec_text = _load(args.system)
    k = lie_engine.control_algebra(system, args.tol)
    kind = _resolve_kind(system, kind_text, args.kind, k)
    bound = None
    if kind.tabulated:
        try:
            bound = speed_limit.qsl_bound(system, kind, k).bound_theorem
        except speed_limit.BoundError as exc:
            log.warning("%s", exc)
    elif len(system.controls) == 1:
        bound = speed_limit.single_control_bound(lie_engine.project_drift(system.drift, k), system.n)
    grid, step = _estimate_grid(args, bound)
    cfg = grape.GrapeConfig(
        slots=args.slots,
        restarts=args.restarts,
        max_iter=args.max_iter,
        cutoff=args.cutoff,
        method=args.method,
        full_sweep=args.full_sweep,
        seed=_seed(args),
    )
    out = _out_dir(args.out_dir or ".")
    t0 = time.perf_counter()
    estimate, records = grape.estimate_qsl(system, args.targets, grid, cfg, jobs=args.jobs)
    elapsed = time.perf_counter() - t0

    _write_csv(
        out / "waterfall.csv",
        ["target_id", "T", "best_error"],
        [[r.target_id, _fmt(t), _fmt(e)] for r in records for t, e in zip(r.times, r.errors)],
    )
    _write_csv(out / "histogram.csv", ["target_id", "min_time"], [[r.target_id, _fmt(r.min_time)] for r in records])
    try:
        (out / "system.json").write_text(spec_text)
    except OSError as exc:
        raise CliExit(EXIT_IO, f"cannot write {out / 'system.json'}: {exc.strerror}") from None
    if not args.no_figures:
        from . import plotting

        try:
            plotting.waterfall_figure(records, out / "waterfall.png", bound, cfg.cutoff)
            plotting.histogram_figure(records, out / "histogram.png", bound)
        except OSError as exc:
            raise CliExit(EXIT_IO, f"cannot write figures: {exc}") from None
    _write_manifest(
        out,
        args,
        spec_text,
        {
            "kind": str(kind),
            "seed": cfg.seed,
            "config": dataclasses.asdict(cfg),
            "targets": args.targets,
            "grid": {"tmin": grid[0], "tmax": grid[-1], "step": step, "points": len(grid)},
            "tol": args.tol,
            "jobs": args.jobs,
            "bound": bound,
            "qsl_estimate": estimate,
            "elapsed_seconds": round(elapsed, 3),
            "grid_caveat": grape.GRID_CAVEAT,
        },
    )
    if estimate is None:
        summary = "qsl_estimate: grid exhausted"
    else:
        summary = f"qsl_estimate: {estimate:.6g}"
    if bound is not None:
        summary += f"  bound: {bound:.6g}"
        if estimate is not None:
            rel = "above" if estimate > bound + step else ("below" if estimate < bound - step else "at")
            summary += f"  ({rel} the bound, ratio {estimate / bound:.4f})"
    print(summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsl", description="Quantum speed-limit bounds and GRAPE estimates.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("system", help="JSON file with n, drift, controls and optional kind")
        p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance")
        p.set_defaults(func=func)
        return p

    add("controllability", cmd_controllability, "Lie-closure dimension and verdict")
    for name, func, help_text in (
        ("bound", cmd_bound, "analytic lower bound"),
        ("tightness", cmd_tightness, "whether the bound is expected to be attained"),
    ):
        p = add(name, func, help_text)
        p.add_argument("--kind", help="SO, Sp, SU_pq(p,q) or auto (overrides the file)")
        p.add_argument("--degeneracy-tol", type=float, default=lie_engine.DEGENERACY_TOL)
        if name == "bound":
            p.add_argument("--out-dir", help="also write bound.csv and manifest.json here")

    p = add("estimate", cmd_estimate, "GRAPE minimum-time estimate over Haar-random targets")
    p.add_argument("--kind", help="SO, Sp, SU_pq(p,q) or auto (overrides the file)")
    p.add_argument("--targets", type=int, default=10)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float, help=f"default {DEFAULT_TMAX_FACTOR} x the analytic bound")
    p.add_argument("--tsteps", type=int, default=DEFAULT_TSTEPS, help="grid step is tmax / tsteps")
    p.add_argument("--tstep", type=float, help="explicit grid step (overrides --tsteps)")
    p.add_argument("--slots", type=int, default=100)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--cutoff", type=float, default=1e-7)
    p.add_argument("--method", choices=("lbfgs", "gradient"), default="lbfgs")
    p.add_argument("--full-sweep", action="store_true", help="keep optimizing past the first converged time")
    p.add_argument("--seed", type=int, help="master seed (default: $QSL_SEED or 0)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--degeneracy-tol", type=float, default=lie_engine.DEGENERACY_TOL)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    args.argv = argv
    args.started = datetime.now(timezone.utc).isoformat()
    try:
        return args.func(args)
    except CliExit as exc:
        sys.stdout.flush()
        if exc.args and exc.args[0]:
            print(f"error: {exc.args[0]}", file=sys.stderr)
        return exc.code
    except (ValueError, lie_engine.MatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
