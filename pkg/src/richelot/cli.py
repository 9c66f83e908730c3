"""Command line interface.

Subcommands: tree (build and export), verify (run suites), classes
(enumerate pair groupings of a branch set), push (transport a point
through a Richelot isogeny), symp (symplectic graph checks).  Exit codes:
0 all checks passed, 1 a verification failed, 2 usage error.

A config file holds key=value lines (comments with #); command line flags
override file values.  All randomness flows from the single seed recorded
in the report, and reports are byte-identical across runs with the same
configuration; timings go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import symplectic as sy
from .poly import Poly, parse_point
from .splitting import (
    Curve,
    DegeneratePointError,
    MembershipError,
    QuadraticSplitting,
    SplitJacobianError,
    enumerate_classes,
    pushforward_point,
)
from .tower import TowerContext, TowerError, parse_element
from .tree import DEFAULT_ALPHAS, build_tree, tree_to_json
from .verify import SUITE_ORDER, RunConfig, report_to_json, run_suites


class UsageError(Exception):
    pass


CONFIG_KEYS = {
    "alphas": str,
    "depth": int,
    "depth_cap": int,
    "seed": int,
    "samples": int,
    "push_points": int,
    "push_splittings": int,
    "max_vertices": int,
    "max_tower_height": int,
    "json_indent": int,
    "threads": int,
}


def read_config(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = raw if CONFIG_KEYS[key] is str else CONFIG_KEYS[key](raw)
    return values


def parse_alphas(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise UsageError(f"--alphas needs 5 comma-separated rationals, got {len(parts)}")
    try:
        return tuple(Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational in --alphas: {exc}") from exc


def build_run_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "alphas" in values and isinstance(values["alphas"], str):
        values["alphas"] = parse_alphas(values["alphas"])
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_output(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_tree(args) -> int:
    cfg = build_run_config(args)
    tree = build_tree(
        cfg.alphas,
        args.depth if args.depth is not None else 2,
        depth_cap=cfg.depth_cap,
        max_vertices=cfg.max_vertices,
    )
    payload = tree_to_json(tree)
    _write_output(json.dumps(payload, indent=cfg.json_indent, sort_keys=True) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    cfg = build_run_config(args)
    names = SUITE_ORDER if args.suite == "all" else [args.suite]
    report = run_suites(names, cfg)
    _write_output(report_to_json(report, cfg.json_indent), args.out)
    return 0 if report["passed"] else 1


def cmd_classes(args) -> int:
    parts = [p.strip() for p in args.branch.split(",")]
    if len(parts) != 6:
        raise UsageError(f"--branch needs 6 comma-separated points, got {len(parts)}")
    ctx = TowerContext()
    points = []
    for p in parts:
        pt, ctx = parse_point(p, ctx)
        points.append(pt)
    classes = enumerate_classes(points)
    payload = {"branch": [str(p) for p in points], "classes": [c.to_json() for c in classes]}
    _write_output(json.dumps(payload, indent=args.json_indent or 2, sort_keys=True) + "\n", args.out)
    return 0


def _poly_from_strings(coeffs, ctx):
    elems = []
    for c in coeffs:
        e, ctx = parse_element(c, ctx)
        elems.append(e)
    return Poly(elems, ctx), ctx


def cmd_push(args) -> int:
    try:
        with open(args.splitting, encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read splitting file: {exc}") from exc
    try:
        curve_spec = spec["curve"]
        split_spec = spec["splitting"]
        ctx = TowerContext()
        d, ctx = parse_element(curve_spec["D"], ctx)
        f, ctx = _poly_from_strings(curve_spec["coeffs"], ctx)
        gs = []
        for key in ("g1", "g2", "g3"):
            g, ctx = _poly_from_strings(split_spec[key], ctx)
            gs.append(g)
    except (KeyError, TowerError) as exc:
        raise UsageError(f"malformed splitting file: {exc}") from exc
    parts = args.point.split(",")
    if len(parts) != 2:
        raise UsageError("--point needs x,y")
    try:
        x0, ctx = parse_element(parts[0].strip(), ctx)
        y0, ctx = parse_element(parts[1].strip(), ctx)
    except TowerError as exc:
        raise UsageError(f"bad point: {exc}") from exc
    curve = Curve(d, f, None, ctx)
    s = QuadraticSplitting(gs[0], gs[1], gs[2], d)
    try:
        s.validate()
        ((z1, t1), (z2, t2)), _ = pushforward_point(curve, s, ctx.lift(x0), ctx.lift(y0))
    except (MembershipError, SplitJacobianError, DegeneratePointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "points": [
            {"z": str(z1), "t": str(t1)},
            {"z": str(z2), "t": str(t2)},
        ]
    }
    _write_output(json.dumps(payload, indent=args.json_indent or 2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_symp(args) -> int:
    if args.check == "regular":
        radius = args.radius
        dist = sy.ball(radius)
        degree_ok = all(len(set(sy.neighbors(v))) == 15 for v in dist)
        payload = {
            "check": "regular",
            "radius": radius,
            "vertices": len(dist),
            "passed": degree_ok,
        }
    elif args.check == "scalars":
        if args.level == 1:
            fixers = sy.scalar_fix_level1()
            payload = {
                "check": "scalars",
                "level": 1,
                "fixers": len(fixers),
                "passed": fixers == [sy.identity(2)],
            }
        elif args.level == 2:
            if args.exhaustive:
                fixers = sy.scalar_fix_level2_exhaustive()
                payload = {
                    "check": "scalars",
                    "level": 2,
                    "mode": "exhaustive",
                    "fixers": len(fixers),
                    "passed": set(fixers) == set(sy.scalar_matrices(2)),
                }
            else:
                res = sy.scalar_fix_level2_sampled(args.samples or 100000, args.seed or 0)
                payload = {
                    "check": "scalars",
                    "level": 2,
                    "mode": "sampled",
                    "nonscalars_checked": res.get("nonscalar_checked", 0),
                    "passed": res["passed"],
                }
        else:
            raise UsageError("scalars check supports --level 1 or 2")
    elif args.check == "quotient":
        results = [sy.quotient_pairing_check(lag)["passed"] for lag in sy.lagrangians()]
        payload = {"check": "quotient", "lagrangians": len(results), "passed": all(results)}
    else:
        raise UsageError(f"unknown check {args.check!r}")
    _write_output(json.dumps(payload, indent=args.json_indent or 2, sort_keys=True) + "\n", args.out)
    return 0 if payload["passed"] else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="richelot",
        description="Exact Richelot isogeny trees over quadratic towers: "
        "construction and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_alphas=True):
        p.add_argument("--config", help="key=value config file; flags override")
        if with_alphas:
            p.add_argument("--alphas", help="5 comma-separated rationals")
        p.add_argument("--seed", type=int, help="seed for sampled checks")
        p.add_argument("--threads", type=int, help="reserved; suites run sequentially")
        p.add_argument("--json-indent", dest="json_indent", type=int, help="report indent")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p_tree = sub.add_parser("tree", help="build the decorated tree and export JSON")
    add_common(p_tree)
    p_tree.add_argument("--depth", type=int, help="tree depth (default 2)")
    p_tree.add_argument("--depth-cap", dest="depth_cap", type=int)
    p_tree.add_argument("--max-vertices", dest="max_vertices", type=int)
    p_tree.set_defaults(func=cmd_tree)

    p_verify = sub.add_parser("verify", help="run verification suites")
    add_common(p_verify)
    p_verify.add_argument(
        "--suite",
        default="all",
        choices=SUITE_ORDER + ["all"],
        help="which suite to run",
    )
    p_verify.add_argument("--depth", type=int, help="tree depth for the decoration suite")
    p_verify.add_argument("--depth-cap", dest="depth_cap", type=int)
    p_verify.add_argument("--samples", type=int, help="level-2 symplectic sample size")
    p_verify.add_argument("--push-points", dest="push_points", type=int)
    p_verify.add_argument("--push-splittings", dest="push_splittings", type=int)
    p_verify.add_argument("--max-vertices", dest="max_vertices", type=int)
    p_verify.add_argument("--max-tower-height", dest="max_tower_height", type=int)
    p_verify.set_defaults(func=cmd_verify)

    p_classes = sub.add_parser("classes", help="the 15 pair groupings of a branch set")
    p_classes.add_argument("--branch", required=True, help="6 comma-separated points (or inf)")
    p_classes.add_argument("--json-indent", dest="json_indent", type=int)
    p_classes.add_argument("--out")
    p_classes.set_defaults(func=cmd_classes)

    p_push = sub.add_parser("push", help="transport a point through a Richelot isogeny")
    p_push.add_argument("--splitting", required=True, help="JSON file with curve and splitting")
    p_push.add_argument("--point", required=True, help="x,y in the element grammar")
    p_push.add_argument("--json-indent", dest="json_indent", type=int)
    p_push.add_argument("--out")
    p_push.set_defaults(func=cmd_push)

    p_symp = sub.add_parser("symp", help="symplectic module checks")
    p_symp.add_argument("--level", type=int, default=1)
    p_symp.add_argument("--check", required=True, choices=["regular", "scalars", "quotient"])
    p_symp.add_argument("--radius", type=int, default=2)
    p_symp.add_argument("--samples", type=int)
    p_symp.add_argument("--seed", type=int)
    p_symp.add_argument("--exhaustive", action="store_true")
    p_symp.add_argument("--json-indent", dest="json_indent", type=int)
    p_symp.add_argument("--out")
    p_symp.set_defaults(func=cmd_symp)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (TowerError, MembershipError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
