"""Verification suites over every component, with deterministic reports.

Each suite returns a dict of named checks; the runner assembles them into
one report whose JSON serialization is byte-identical across runs with
the same configuration and seed.  Wall-clock timings are therefore kept
out of the report body and printed to stderr instead.
"""

from __future__ import annotations

import json
import random
import sys
import time
from dataclasses import dataclass, field, fields
from fractions import Fraction
from itertools import combinations

from . import symplectic as sy
from . import twotorsion as tt
from .poly import ProjPoint
from .splitting import (
    Curve,
    SplittingClass,
    det3,
    dual_matrix,
    enumerate_classes,
    map_N,
    matrix_M,
    pushforward_point,
    richelot_curve,
    richelot_splitting,
    splitting_for_class,
)
from .tower import TowerContext, adjoin_sqrt
from .tree import (
    DEFAULT_ALPHAS,
    DEFAULT_DEPTH_CAP,
    build_tree,
    corrupt_child_image,
    corrupt_depth1_support,
    corrupt_sibling_duplicate,
    mumford_bridge,
    validate_decoration,
    validate_specialization,
    verify_k2prime,
)


@dataclass
class RunConfig:
    alphas: tuple = DEFAULT_ALPHAS
    depth: int = 3
    depth_cap: int = DEFAULT_DEPTH_CAP
    seed: int = 0
    samples: int = 100000
    push_points: int = 20
    push_splittings: int = 3
    max_vertices: int = 5000
    max_tower_height: int = 16
    json_indent: int = 2
    threads: int = 1

    def __post_init__(self):
        self.alphas = tuple(Fraction(a) for a in self.alphas)
        for cap in ("depth", "depth_cap", "samples", "max_vertices", "max_tower_height", "threads"):
            if getattr(self, cap) < 1 and cap != "depth":
                raise ValueError(f"{cap} must be positive")

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "alphas":
                v = [f"{a.numerator}/{a.denominator}" for a in v]
            out[f.name] = v
        return out


def _check(name, passed, **info):
    entry = {"name": name, "passed": bool(passed)}
    entry.update(info)
    return entry


# -- suites -------------------------------------------------------------------


def suite_classes(cfg: RunConfig) -> list:
    ctx = TowerContext()
    curve = Curve.from_branch_values(cfg.alphas, ctx)
    classes = enumerate_classes(curve.branch)
    checks = [
        _check("fifteen_classes", len(classes) == 15 and len(set(classes)) == 15, count=len(classes)),
        _check(
            "classes_cover_branch",
            all(c.support() == curve.branch for c in classes),
        ),
    ]
    ok = True
    for c in classes:
        triple, _, adjoined = map_N(matrix_M(c))
        if SplittingClass(triple) != c or adjoined:
            ok = False
            break
    checks.append(_check("n_after_m_is_identity", ok, classes=len(classes)))
    return checks


def suite_richelot(cfg: RunConfig) -> list:
    ctx = TowerContext()
    curve = Curve.from_branch_values(cfg.alphas, ctx)
    classes = enumerate_classes(curve.branch)
    bracket_ok = det_ok = sqfree_ok = True
    for c in classes:
        s = splitting_for_class(curve, c)
        h = richelot_splitting(s)
        hm = h.matrix()
        dm = dual_matrix(s.matrix())
        if any(hm[i][j] != dm[i][j] for i in range(3) for j in range(3)):
            bracket_ok = False
        det_g = s.det()
        if det3(hm) != 2 * det_g * det_g:
            det_ok = False
        prod = h.product()
        if not (prod.degree in (5, 6) and prod.is_squarefree()):
            sqfree_ok = False
    checks = [
        _check("bracket_matrix_equals_dual", bracket_ok, splittings=15),
        _check("det_dual_is_twice_square", det_ok, splittings=15),
        _check("image_squarefree_degree_5_or_6", sqfree_ok, splittings=15),
    ]

    rng = random.Random((cfg.seed, "dual"))
    rand_ok = True
    for _ in range(100):
        a = tuple(
            tuple(ctx.rational(rng.randint(-9, 9)) for _ in range(3)) for _ in range(3)
        )
        d = det3(a)
        if det3(dual_matrix(a)) != 2 * d * d:
            rand_ok = False
            break
    checks.append(_check("dual_det_identity_random_matrices", rand_ok, matrices=100))

    # closed forms of the image branch for {a1,a2},{a3,a4},{a5,inf}
    a = [ctx.rational(v) for v in cfg.alphas]
    cls = SplittingClass(
        [
            (ProjPoint.finite(a[0]), ProjPoint.finite(a[1])),
            (ProjPoint.finite(a[2]), ProjPoint.finite(a[3])),
            (ProjPoint.finite(a[4]), ProjPoint.infinity()),
        ]
    )
    img = richelot_curve(curve, splitting_for_class(curve, cls))
    bctx = img.context
    s1 = bctx.lift((a[0] - a[2]) * (a[0] - a[3]) * (a[1] - a[2]) * (a[1] - a[3])).sqrt()
    s2 = bctx.lift((a[0] - a[4]) * (a[1] - a[4])).sqrt()
    s3 = bctx.lift((a[2] - a[4]) * (a[3] - a[4])).sqrt()
    if None in (s1, s2, s3):
        checks.append(_check("image_branch_closed_forms", False, reason="roots missing"))
    else:
        den = (-a[0] - a[1] + a[2] + a[3]).inverse()
        expected = set()
        for sgn in (1, -1):
            expected.add(ProjPoint.finite(((-a[0] * a[1] + a[2] * a[3]) + sgn * s1) * den))
            expected.add(ProjPoint.finite(a[4] + sgn * s2))
            expected.add(ProjPoint.finite(a[4] + sgn * s3))
        checks.append(
            _check("image_branch_closed_forms", expected == set(img.curve.branch))
        )

    # transported points satisfy the image curve equation exactly
    from .splitting import DegeneratePointError

    rng = random.Random((cfg.seed, "push"))
    done = 0
    failures = 0
    per_split = -(-cfg.push_points // cfg.push_splittings)
    for c in classes[: cfg.push_splittings]:
        s = splitting_for_class(curve, c)
        pushed = 0
        tried = set()
        while pushed < per_split:
            x_val = Fraction(rng.randint(-60, 60), rng.randint(1, 6))
            if x_val in tried:
                continue
            tried.add(x_val)
            x0 = ctx.rational(x_val)
            rhs = curve.eval_rhs(x0)
            if rhs.is_zero():
                continue
            _, y0 = adjoin_sqrt(rhs)
            try:
                pushforward_point(curve, s, x0, y0)
            except DegeneratePointError:
                continue
            except AssertionError:
                failures += 1
            pushed += 1
            done += 1
    checks.append(
        _check(
            "pushforward_on_curve",
            failures == 0 and done >= cfg.push_points,
            points=done,
            splittings=min(cfg.push_splittings, 15),
        )
    )
    return checks


def suite_mumford(cfg: RunConfig) -> list:
    labels = frozenset(["1", "2", "3", "4", "5", "inf"])
    elems = tt.all_elements(labels)
    checks = [_check("sixteen_elements", len(elems) == 16 and len(set(elems)) == 16)]

    bilinear = alternating = True
    kernel = []
    for x in elems:
        if tt.pairing(x, x) != 1:
            alternating = False
        if all(tt.pairing(x, y) == 1 for y in elems) and not x.is_identity():
            kernel.append(x)
    for x in elems:
        for y in elems:
            for z in elems:
                if tt.pairing(x + y, z) != tt.pairing(x, z) * tt.pairing(y, z):
                    bilinear = False
                    break
            if not bilinear:
                break
        if not bilinear:
            break
    checks.append(_check("pairing_bilinear", bilinear))
    checks.append(_check("pairing_alternating", alternating))
    checks.append(_check("pairing_nondegenerate", not kernel))

    # distinct pairs only: any alternating pairing has x orthogonal to x,
    # while canonical representatives of equal classes always intersect
    iso_ok = all(
        (tt.pairing(x, y) == 1) == (not (x.subset & y.subset))
        for x in elems
        for y in elems
        if x != y
    )
    checks.append(_check("isotropy_iff_disjoint_exhaustive", iso_ok, pairs=240))

    subs = tt.maximal_isotropics(labels)
    parts = tt.label_partitions(labels)
    match_ok = len(subs) == 15 and all(
        tt.subgroup_for_pairs(labels, p) in subs for p in parts
    )
    checks.append(_check("fifteen_maximal_isotropics_match_classes", match_ok, count=len(subs)))

    rng = random.Random((cfg.seed, "perm"))
    base = sorted(labels)
    equi_ok = True
    for _ in range(1000):
        perm = base[:]
        rng.shuffle(perm)
        sigma = dict(zip(base, perm))
        x = rng.choice(elems)
        y = rng.choice(elems)
        if tt.pairing(tt.permute_element(sigma, x), tt.permute_element(sigma, y)) != tt.pairing(x, y):
            equi_ok = False
            break
        part = rng.choice(parts)
        lhs = frozenset(
            tt.permute_element(sigma, e) for e in tt.subgroup_for_pairs(labels, part)
        )
        rhs = tt.subgroup_for_pairs(labels, tt.permute_partition(sigma, part))
        if lhs != rhs:
            equi_ok = False
            break
    checks.append(_check("permutation_equivariance", equi_ok, trials=1000))
    return checks


def suite_symplectic(cfg: RunConfig) -> list:
    checks = [
        _check("fifteen_lagrangians", len(sy.lagrangians()) == 15),
    ]
    dist = sy.ball(2)
    degree_ok = all(len(set(sy.neighbors(v))) == 15 for v in dist)
    # connectivity of the induced radius-2 truncation
    verts = set(dist)
    adj = {v: [u for u in sy.neighbors(v) if u in verts] for v in verts}
    seen = {sy.Vertex.root()}
    frontier = [sy.Vertex.root()]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    checks.append(
        _check(
            "radius2_truncation_15_regular_connected",
            degree_ok and seen == verts,
            vertices=len(verts),
        )
    )

    paths = sy.nonbacktracking_paths(3)
    by_len = {}
    for p in paths:
        by_len[len(p) - 1] = by_len.get(len(p) - 1, 0) + 1
    law_ok = all(sy.check_path_laws(p)["passed"] for p in paths)
    counts_ok = by_len == {1: 15, 2: 210, 3: 2940}
    checks.append(_check("path_laws_length_le_3", law_ok and counts_ok, counts=by_len))

    formula_ok = True
    root = sy.Vertex.root()
    pairs = 0
    for lag in sy.lagrangians():
        for u in sy.neighbors(lag):
            pairs += 1
            if not sy.check_path_laws((root, lag, u))["passed"]:
                formula_ok = False
    checks.append(_check("length2_scaling_laws_incl_backtrack", formula_ok, pairs=pairs))

    quo_ok = all(sy.quotient_pairing_check(lag)["passed"] for lag in sy.lagrangians())
    corrupted = sy.quotient_pairing_check(sy.lagrangians()[0], corrupt=True)
    checks.append(_check("quotient_pairing_all_lagrangians", quo_ok, lagrangians=15))
    checks.append(
        _check(
            "quotient_pairing_corruption_detected",
            not corrupted["passed"] and corrupted["counterexample"] is not None,
        )
    )

    fixers = sy.scalar_fix_level1()
    checks.append(
        _check(
            "level1_scalar_fix_identity_only",
            fixers == [sy.identity(2)],
            group_order=720,
            fixers=len(fixers),
        )
    )
    res = sy.scalar_fix_level2_sampled(cfg.samples, cfg.seed)
    checks.append(
        _check(
            "level2_scalars_fix_and_sampled_nonscalars_move",
            res["passed"],
            nonscalars_checked=res.get("nonscalar_checked", 0),
        )
    )
    return checks


def suite_decoration(cfg: RunConfig) -> list:
    tree = build_tree(
        cfg.alphas, cfg.depth, depth_cap=cfg.depth_cap, max_vertices=cfg.max_vertices
    )
    counts = {}
    for v in tree.vertices:
        counts[v.depth] = counts.get(v.depth, 0) + 1
    want = {0: 1}
    for k in range(1, cfg.depth + 1):
        want[k] = 15 * 14 ** (k - 1)
    checks = [
        _check("vertex_counts", counts == want, counts=counts),
        _check("det_nonzero_all_vertices", all(v.det_g is None or not v.det_g.is_zero() for v in tree.vertices)),
    ]
    rep = validate_decoration(tree)
    checks.append(
        _check(
            "decoration_clauses",
            rep["passed"],
            clause_a=rep["clause_a"]["passed"],
            clause_b=rep["clause_b"]["passed"],
            clause_c=rep["clause_c"]["passed"],
        )
    )
    neg_a = validate_decoration(corrupt_sibling_duplicate(tree))
    neg_b = validate_decoration(corrupt_depth1_support(tree))
    neg_c = validate_decoration(corrupt_child_image(tree))
    checks.append(
        _check(
            "negative_controls_fail_expected_clause",
            (not neg_a["clause_a"]["passed"])
            and (not neg_b["clause_b"]["passed"])
            and (not neg_c["clause_c"]["passed"]),
        )
    )
    checks.append(_check("mumford_bridge_depth1", mumford_bridge(tree)["passed"]))
    return checks


def suite_k2prime(cfg: RunConfig) -> list:
    spec = validate_specialization(cfg.alphas)
    checks = [
        _check(
            "specialization_rank",
            spec["passed"],
            rank=spec.get("rank"),
            sign_independent=spec.get("sign_independent"),
        )
    ]
    tree = build_tree(cfg.alphas, 2, depth_cap=cfg.depth_cap, max_vertices=cfg.max_vertices)
    rep = verify_k2prime(tree, max_height=cfg.max_tower_height)
    checks.append(_check("image_branch_closed_forms", rep["closed_forms"]["passed"]))
    checks.append(
        _check(
            "depth2_tower_mutual_inclusion",
            rep["inclusion"]["passed"],
            merged_height=rep["inclusion"]["merged_height"],
            reference_height=rep["inclusion"]["reference_height"],
        )
    )
    checks.append(
        _check(
            "single_differences_not_square",
            rep["differences_not_square"]["passed"],
            offenders=[list(o) for o in rep["differences_not_square"]["offenders"]],
        )
    )
    return checks


SUITES = {
    "classes": suite_classes,
    "richelot": suite_richelot,
    "mumford": suite_mumford,
    "symplectic": suite_symplectic,
    "decoration": suite_decoration,
    "k2prime": suite_k2prime,
}

SUITE_ORDER = ["classes", "richelot", "mumford", "symplectic", "decoration", "k2prime"]


def run_suites(names, cfg: RunConfig, timings_to=sys.stderr) -> dict:
    """Run the named suites and assemble the deterministic report."""
    report = {"config": cfg.to_json(), "suites": [], "passed": True}
    total = passed_n = 0
    for name in SUITE_ORDER:
        if name not in names:
            continue
        t0 = time.monotonic()
        checks = SUITES[name](cfg)
        dt = time.monotonic() - t0
        suite_passed = all(c["passed"] for c in checks)
        report["suites"].append({"name": name, "passed": suite_passed, "checks": checks})
        report["passed"] = report["passed"] and suite_passed
        total += len(checks)
        passed_n += sum(1 for c in checks if c["passed"])
        if timings_to is not None:
            print(f"[timing] suite {name}: {dt:.2f}s", file=timings_to)
    report["checks_total"] = total
    report["checks_passed"] = passed_n
    return report


def report_to_json(report: dict, indent: int = 2) -> str:
    return json.dumps(report, indent=indent, sort_keys=True) + "\n"
