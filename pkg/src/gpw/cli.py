"""Command-line front end emitting deterministic JSON reports.

Exit status: 0 when the report passes, 1 on a property failure (the report
then carries a counterexample), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import geodesics, geometry, killing, models, operators
from .smoothfn import DSLParseError, SmoothFunction, parse

SCHEMA = 1
DEFAULT_SEED = 0


class InputError(ValueError):
    pass


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _floats(text: str, n: int | None = None, what: str = "value") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot read {what} {text!r}: {exc}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"{what} needs {n} comma-separated numbers, got {len(vals)}")
    return vals


def _point(text: str) -> np.ndarray:
    vals = _floats(text, what="point")
    if len(vals) == 1:
        return np.array([0.0, vals[0], 0.0, 0.0])
    if len(vals) != 4:
        raise InputError("point needs 1 (y) or 4 (x,y,xt,yt) numbers")
    return np.array(vals)


def _metric_at(text: str) -> tuple[SmoothFunction, np.ndarray]:
    if "@" not in text:
        raise InputError(f"expected <DSL>@<point>, got {text!r}")
    dsl, pt = text.rsplit("@", 1)
    return parse(dsl), _point(pt)


# ----------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> tuple[dict, dict, dict, bool]:
    f = parse(args.metric)
    domain = tuple(_floats(args.domain, 2, "domain")) if args.domain else None
    cls = models.classify(f, domain)
    cert = killing.dimension_certificate(f)
    results = {**cls.to_json(), "dim_killing": cert.table, "dimension_certificate": cert.to_json()}
    return {"metric": f.to_dsl(), "domain": domain}, results, {"alpha2_constancy": 1e-9}, cert.consistent


def cmd_curvature(args):
    f = parse(args.metric)
    spec = geometry.Mf(f)
    P = _point(args.point)
    table = geometry.curvature(spec, P, args.order)
    results = {"order": args.order, "components": table.to_json()}
    ok = True
    if args.oracle:
        if args.order != 0:
            raise InputError("the difference oracle covers order 0 only")
        diff = table.max_abs_difference(geometry.curvature_fd_oracle(spec, P))
        ok = diff <= 1e-5
        results["oracle_max_abs_difference"] = diff
    return {"metric": f.to_dsl(), "point": P.tolist()}, results, {"oracle": 1e-5}, ok


def cmd_geodesic(args):
    f = parse(args.metric)
    spec = geometry.Mf(f)
    start = _point(args.start)
    vel = np.array(_floats(args.velocity, 4, "velocity"))
    g = geodesics.GeodesicSpec.from_arrays(start, vel)
    times = np.linspace(0.0, args.t, args.samples + 1)
    traj = geodesics.trajectory(spec, g, times)
    results = {"point": traj[-1].tolist(), "times": times.tolist(), "trajectory": traj.tolist()}
    ok = bool(np.all(np.isfinite(traj)))
    if args.oracle:
        ts, states = geodesics.rk4_trajectory(spec, g, args.t, steps=args.steps, samples=args.samples)
        err = float(np.abs(states[:, :4] - geodesics.trajectory(spec, g, ts)).max())
        drift = geodesics.speed_drift(spec, states)
        results["oracle"] = {"steps": args.steps, "max_abs_difference": err, "speed_drift": drift}
        ok = ok and err <= 1e-6
        if not ok:
            results["counterexample"] = {"start": start.tolist(), "velocity": vel.tolist()}
    if args.dump_trajectory:
        with open(args.dump_trajectory, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "xt", "yt"])
            for t, row in zip(times, traj):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    inputs = {"metric": f.to_dsl(), "start": start.tolist(), "velocity": vel.tolist(), "t": args.t}
    return inputs, results, {"oracle": 1e-6}, ok


def cmd_verify(args):
    f = parse(args.metric)
    spec = geometry.Mf(f)
    fn = operators.verify_osserman if args.property == "osserman" else operators.verify_ivanov_petrova
    y_range = tuple(_floats(args.y_range, 2, "y range")) if args.y_range else None
    rep = fn(spec, args.samples, args.seed, y_range=y_range)
    payload = rep.to_json()
    tol = payload.pop("tolerances")
    inputs = {"metric": f.to_dsl(), "property": args.property, "samples": args.samples, "y_range": y_range}
    return inputs, payload, tol, rep.passed


def cmd_killing(args):
    f = parse(args.metric)
    cert = killing.dimension_certificate(f, seed=args.seed)
    fields = killing.catalog(f)
    rng = np.random.default_rng(args.seed)
    pts = killing._sample_box(f, rng, 100)
    residuals = {X.name: float(np.abs(killing.killing_residual(f, X, pts)).max()) for X in fields}
    table = killing.bracket_table(f, fields, seed=args.seed)
    C = table["structure_constants"]
    names = table["names"]
    brackets = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            terms = {names[k]: float(C[i, j, k]) for k in range(len(names)) if C[i, j, k] != 0}
            brackets.append({"pair": [names[i], names[j]], "result": terms})
    ok = cert.consistent and max(residuals.values()) <= 1e-10 and table["span_residual"] <= 1e-9
    results = {
        "dimension": cert.table,
        "certificate": cert.to_json(),
        "catalog": [str(X) for X in fields],
        "residual_max": residuals,
        "brackets": brackets,
        "bracket_span_residual": table["span_residual"],
        "bracket_killing_residual": table["killing_residual"],
    }
    return {"metric": f.to_dsl()}, results, {"residual": 1e-10, "bracket": 1e-9}, ok


def cmd_isometry(args):
    f1, P1 = _metric_at(args.source)
    f2, P2 = _metric_at(args.target)
    res = models.build_isometry(f1, P1, f2, P2, K=args.K)
    inputs = {"from": [f1.to_dsl(), P1.tolist()], "to": [f2.to_dsl(), P2.tolist()], "K": args.K}
    payload = res.to_json()
    tol = payload.pop("tolerances")
    return inputs, payload, tol, res.status != "inconclusive"


COMMANDS = {
    "classify": cmd_classify,
    "curvature": cmd_curvature,
    "geodesic": cmd_geodesic,
    "verify": cmd_verify,
    "killing": cmd_killing,
    "isometry": cmd_isometry,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    common.add_argument("--pretty", action="store_true", help="indent JSON and print a summary on stderr")
    common.add_argument("--out", help="also write the report to this file")
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(prog="gpw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common])
    p.add_argument("--metric", required=True)
    p.add_argument("--domain")

    p = sub.add_parser("curvature", parents=[common])
    p.add_argument("--metric", required=True)
    p.add_argument("--point", default="0,0,0,0")
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--oracle", action="store_true")

    p = sub.add_parser("geodesic", parents=[common])
    p.add_argument("--metric", required=True)
    p.add_argument("--start", default="0,0,0,0")
    p.add_argument("--velocity", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--dump-trajectory", dest="dump_trajectory")

    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--metric", required=True)
    p.add_argument("--property", choices=["osserman", "ip"], required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--y-range", dest="y_range")

    p = sub.add_parser("killing", parents=[common])
    p.add_argument("--metric", required=True)

    p = sub.add_parser("isometry", parents=[common])
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--K", type=int, default=8)
    return parser


def _emit(report: dict, args) -> None:
    text = json.dumps(_to_jsonable(report), sort_keys=True, indent=2 if getattr(args, "pretty", False) else None)
    sys.stdout.write(text + "\n")
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if getattr(args, "pretty", False):
        verdict = "PASS" if report.get("pass") else "FAIL"
        print(f"{report.get('command')}: {verdict}", file=sys.stderr)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = int(os.environ.get("GPW_SEED", DEFAULT_SEED))
    report = {"schema": SCHEMA, "command": args.command, "seed": args.seed}
    try:
        inputs, results, tolerances, ok = COMMANDS[args.command](args)
    except (DSLParseError, InputError) as exc:
        report.update(
            inputs={},
            results={"error": str(exc), "position": getattr(exc, "position", None)},
            tolerances={},
            **{"pass": False},
        )
        _emit(report, args)
        return 2
    report.update(inputs=inputs, results=results, tolerances=tolerances, **{"pass": bool(ok)})
    _emit(report, args)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
