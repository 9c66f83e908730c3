"""Rank-4 symplectic modules over Z/2^n and the lattice graph they span.

Vectors are 4-tuples of ints mod 2^n with the standard alternating form
<x, y> = x1*y3 - x3*y1 + x2*y4 - x4*y2.  Subgroups are stored by their
Howell normal form, a canonical generator matrix over Z/2^n (unique per
subgroup; uniqueness is exercised by tests against an element-set oracle).

The graph has one vertex per maximal isotropic subgroup of some level m
that does not contain the full 2-torsion, with the zero subgroup at level
0 as the root.  All 15 neighbors of a vertex at level m arise from the
maximal isotropics at level m+1 containing the doubled image of its
subgroup; candidates that do contain the full 2-torsion reduce to a vertex
of level m-1 (the parent direction).  Non-backtracking paths from the root
are the vertices of the covering tree, and each path of length n carries a
maximal isotropic subgroup of level n obtained by preimage scaling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Optional

DIM = 4

#: matrix of the standard form: <x, y> = x^T OMEGA y
OMEGA = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))


def form(x, y, mod: int) -> int:
    return (x[0] * y[2] - x[2] * y[0] + x[1] * y[3] - x[3] * y[1]) % mod


def vec_add(x, y, mod: int):
    return tuple((a + b) % mod for a, b in zip(x, y))


def vec_scale(c, x, mod: int):
    return tuple(c * a % mod for a in x)


def mat_mul(a, b, mod: int):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(DIM)) % mod for j in range(DIM))
        for i in range(DIM)
    )


def mat_vec(a, x, mod: int):
    return tuple(sum(a[i][k] * x[k] for k in range(DIM)) % mod for i in range(DIM))


def transpose(a):
    return tuple(tuple(a[j][i] for j in range(DIM)) for i in range(DIM))


def identity(mod: int):
    return tuple(tuple(1 % mod if i == j else 0 for j in range(DIM)) for i in range(DIM))


def reduce_matrix(a, mod: int):
    return tuple(tuple(c % mod for c in row) for row in a)


def is_symplectic(a, n: int) -> bool:
    mod = 1 << n
    return mat_mul(mat_mul(transpose(a), OMEGA, mod), a, mod) == reduce_matrix(OMEGA, mod)


def scalar_matrices(n: int):
    """Scalar members of the symplectic group: c*I with c^2 = 1 mod 2^n."""
    mod = 1 << n
    out = []
    for c in range(1, mod, 2):
        if c * c % mod == 1 % mod:
            out.append(tuple(tuple(c if i == j else 0 for j in range(DIM)) for i in range(DIM)))
    return out


# -- Howell normal form ------------------------------------------------------


def _val2(x: int) -> int:
    return (x & -x).bit_length() - 1


def howell(rows: Iterable, n: int) -> tuple:
    """Canonical generator matrix of the row span over Z/2^n."""
    mod = 1 << n
    work = [tuple(c % mod for c in r) for r in rows]
    work = [r for r in work if any(r)]
    res = []
    for col in range(DIM):
        cand = [r for r in work if r[col]]
        if not cand:
            continue
        v = min(_val2(r[col]) for r in cand)
        piv = min(r for r in cand if _val2(r[col]) == v)
        work.remove(piv)
        inv = pow(piv[col] >> v, -1, mod)
        piv = tuple(c * inv % mod for c in piv)
        nxt = []
        for r in work:
            if r[col]:
                c = r[col] >> v
                r = tuple((a - c * b) % mod for a, b in zip(r, piv))
            if any(r):
                nxt.append(r)
        work = nxt
        shadow = tuple(c * (mod >> v) % mod for c in piv)
        if any(shadow):
            work.append(shadow)
        res.append(piv)
    # reduce entries above each pivot modulo the pivot
    for k in range(len(res)):
        col = next(j for j, c in enumerate(res[k]) if c)
        v = _val2(res[k][col])
        for i in range(k):
            c = res[i][col] >> v
            if c:
                res[i] = tuple((a - c * b) % mod for a, b in zip(res[i], res[k]))
    return tuple(res)


class Subgroup:
    """A subgroup of (Z/2^n)^4 in Howell normal form."""

    __slots__ = ("level", "gens", "_pivots")

    def __init__(self, level: int, gens: tuple, canonical: bool = False):
        self.level = level
        self.gens = gens if canonical else howell(gens, level)
        self._pivots = None

    @classmethod
    def span(cls, level: int, vectors) -> "Subgroup":
        return cls(level, tuple(vectors))

    @classmethod
    def trivial(cls, level: int = 0) -> "Subgroup":
        return cls(level, (), canonical=True)

    def pivots(self):
        if self._pivots is None:
            ps = []
            for r in self.gens:
                col = next(j for j, c in enumerate(r) if c)
                ps.append((col, _val2(r[col])))
            self._pivots = tuple(ps)
        return self._pivots

    def order(self) -> int:
        total = 1
        for _, v in self.pivots():
            total *= 1 << (self.level - v)
        return total

    def contains(self, x) -> bool:
        mod = 1 << self.level
        x = tuple(c % mod for c in x)
        for row, (col, v) in zip(self.gens, self.pivots()):
            if x[col]:
                if _val2(x[col]) < v:
                    return False
                c = x[col] >> v
                x = tuple((a - c * b) % mod for a, b in zip(x, row))
        return not any(x)

    def contains_subgroup(self, other: "Subgroup") -> bool:
        if other.level != self.level:
            raise ValueError("subgroups live at different levels")
        return all(self.contains(g) for g in other.gens)

    def elements(self):
        mod = 1 << self.level
        ranges = [range(1 << (self.level - v)) for _, v in self.pivots()]
        for coeffs in product(*ranges):
            acc = (0,) * DIM
            for c, row in zip(coeffs, self.gens):
                if c:
                    acc = vec_add(acc, vec_scale(c, row, mod), mod)
            yield acc

    def is_isotropic(self) -> bool:
        mod = 1 << self.level
        gs = self.gens
        return all(
            form(gs[i], gs[j], mod) == 0 for i in range(len(gs)) for j in range(i + 1, len(gs))
        )

    def is_maximal_isotropic(self) -> bool:
        """Isotropic of the extremal order 2^(2n) (the cardinality criterion)."""
        return self.is_isotropic() and self.order() == 1 << (2 * self.level)

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.level == other.level and self.gens == other.gens

    def __hash__(self):
        return hash((self.level, self.gens))

    def __repr__(self):
        return f"Subgroup(level={self.level}, gens={self.gens})"


def embed_double(sub: Subgroup) -> Subgroup:
    """Image of a level-(n) subgroup inside level n+1 (doubling map)."""
    mod = 1 << (sub.level + 1)
    return Subgroup(sub.level + 1, tuple(vec_scale(2, g, mod) for g in sub.gens))


# -- graph vertices ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class Vertex:
    m: int
    gens: tuple

    def subgroup(self) -> Subgroup:
        return Subgroup(self.m, self.gens, canonical=True)

    @classmethod
    def root(cls) -> "Vertex":
        return cls(0, ())


def canonical_vertex(level: int, sub: Subgroup) -> Vertex:
    """Reduce a maximal isotropic subgroup to its canonical graph vertex.

    While the subgroup contains the full 2-torsion it drops one level by
    reduction, and while it lies inside the doubled submodule it drops one
    level by halving; the two alternate and preserve level parity.
    """
    n, gens = level, sub.gens
    while n > 0:
        mod = 1 << n
        s = Subgroup(n, gens, canonical=True)
        j2 = [tuple((mod >> 1) if j == i else 0 for j in range(DIM)) for i in range(DIM)]
        if all(s.contains(v) for v in j2):
            n -= 1
            gens = howell(gens, n)
        elif all(c % 2 == 0 for row in gens for c in row):
            n -= 1
            gens = howell(tuple(tuple(c >> 1 for c in row) for row in gens), n)
        else:
            break
    v = Vertex(n, gens)
    final = v.subgroup()
    if not final.is_maximal_isotropic():
        raise AssertionError("vertex reduction produced a non-maximal subgroup")
    return v


def lagrangians() -> list:
    """The 15 maximal isotropic subspaces at level 1, as vertices."""
    vecs = [v for v in product((0, 1), repeat=DIM) if any(v)]
    seen = set()
    out = []
    for a, b in combinations(vecs, 2):
        if form(a, b, 2) == 0 and vec_add(a, b, 2) != (0,) * DIM:
            g = howell((a, b), 1)
            if g not in seen:
                seen.add(g)
                out.append(Vertex(1, g))
    out.sort()
    assert len(out) == 15
    return out


_MAX_NEIGHBOR_LEVEL = 4


@lru_cache(maxsize=4096)
def neighbors(v: Vertex) -> list:
    """All 15 adjacent vertices, canonicalized, in sorted order.

    They arise from the 15 maximal isotropic subgroups one level up that
    contain the doubled subgroup of v; each is found as the preimage of a
    2-dimensional isotropic subspace of the 16-element quotient of the
    orthogonal complement.
    """
    n = v.m + 1
    if n > _MAX_NEIGHBOR_LEVEL:
        raise ValueError(f"neighbor enumeration capped at level {_MAX_NEIGHBOR_LEVEL}")
    mod = 1 << n
    iota = embed_double(v.subgroup())
    iota_elems = sorted(iota.elements())
    perp = [
        x
        for x in product(range(mod), repeat=DIM)
        if all(form(x, g, mod) == 0 for g in iota.gens)
    ]

    def tag(x):
        return min(vec_add(x, e, mod) for e in iota_elems)

    zero_tag = tag((0,) * DIM)
    reps = sorted({tag(x) for x in perp})
    assert len(reps) == 16 and zero_tag == (0,) * DIM
    nonzero = [r for r in reps if r != zero_tag]
    found = {}
    for a, b in combinations(nonzero, 2):
        if form(a, b, mod) != 0:
            continue
        c = tag(vec_add(a, b, mod))
        if c == zero_tag:
            continue
        key = frozenset((a, b, c))
        if key in found:
            continue
        sub = Subgroup(n, iota.gens + (a, b))
        assert sub.order() == 1 << (2 * n) and sub.is_isotropic()
        found[key] = canonical_vertex(n, sub)
    out = sorted(set(found.values()))
    if len(found) != 15 or len(out) != 15:
        raise AssertionError(f"expected 15 neighbors, got {len(out)}")
    return out


def children(v: Vertex) -> list:
    """Neighbors one level up (the parent direction is excluded)."""
    return [u for u in neighbors(v) if u.m == v.m + 1]


def ball(radius: int) -> dict:
    """Vertices within the given radius of the root, with their distances."""
    root = Vertex.root()
    dist = {root: 0}
    frontier = [root]
    for d in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for u in neighbors(v):
                if u not in dist:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


# -- tree paths --------------------------------------------------------------


def nonbacktracking_paths(length: int) -> list:
    """All non-backtracking paths from the root with 1 <= len <= length."""
    out = []
    stack = [(Vertex.root(),)]
    while stack:
        path = stack.pop()
        if len(path) > 1:
            out.append(path)
        if len(path) <= length:
            prev = path[-2] if len(path) >= 2 else None
            for u in neighbors(path[-1]):
                if u != prev:
                    stack.append(path + (u,))
    out.sort(key=lambda p: (len(p), p))
    return [p for p in out if len(p) - 1 <= length]


def path_subgroup(path: tuple) -> Subgroup:
    """The level-n maximal isotropic subgroup attached to a length-n path.

    The endpoint subgroup of level m is rescaled by 2^((n-m)/2) and padded
    with the kernel of that scaling; n - m is always even and nonnegative.
    """
    n = len(path) - 1
    v = path[-1]
    if (n - v.m) < 0 or (n - v.m) % 2:
        raise ValueError(f"path length {n} incompatible with endpoint level {v.m}")
    s = (n - v.m) // 2
    mod = 1 << n
    gens = [vec_scale(1 << s, g, mod) for g in v.gens]
    k = (n + v.m) // 2
    gens += [tuple((1 << k) % mod if j == i else 0 for j in range(DIM)) for i in range(DIM)]
    return Subgroup(n, tuple(gens))


def check_path_laws(path: tuple) -> dict:
    """Parity, maximal isotropy, containment and quotient shape for a path."""
    n = len(path) - 1
    nw = path_subgroup(path)
    report = {
        "parity": (n - path[-1].m) >= 0 and (n - path[-1].m) % 2 == 0,
        "maximal_isotropic": nw.is_maximal_isotropic(),
    }
    if n >= 1:
        parent = path_subgroup(path[:-1])
        emb = embed_double(parent)
        mod = 1 << n
        contained = nw.contains_subgroup(emb)
        report["contains_parent"] = contained
        report["index_four"] = nw.order() == 4 * emb.order()
        report["quotient_exponent_two"] = contained and all(
            emb.contains(vec_scale(2, g, mod)) for g in nw.gens
        )
    report["passed"] = all(v for k, v in report.items() if k != "passed")
    return report


# -- quotient pairing (isogeny halves the level) ------------------------------


def quotient_pairing_check(v: Vertex, corrupt: bool = False) -> dict:
    """Check the induced pairing on the 2-torsion of the quotient by a
    level-1 Lagrangian: well-defined, bilinear, alternating, nondegenerate.

    Quotient 2-torsion is modeled by the level-2 vectors whose double lies
    in the doubled Lagrangian, modulo that image.  On such representatives
    the level-2 form is always even, and the induced mu_2 value is its
    halved residue: the isogeny doubles the polarization form upstairs,
    which surfaces as division by two after the level-2 rescaling of
    representatives.  With corrupt=True one table entry is flipped first,
    and the verdict is expected to turn negative (a self-test of the
    checker)."""
    if v.m != 1:
        raise ValueError("quotient pairing check expects a level-1 vertex")
    mod = 4
    iota = embed_double(v.subgroup())
    iota_elems = sorted(iota.elements())
    lag = set(v.subgroup().elements())
    p2 = [x for x in product(range(mod), repeat=DIM) if tuple(c % 2 for c in x) in lag]

    def tag(x):
        return min(vec_add(x, e, mod) for e in iota_elems)

    cosets = {}
    for x in p2:
        cosets.setdefault(tag(x), []).append(x)
    reps = sorted(cosets)
    assert len(reps) == 16

    def bit(x, y):
        f = form(x, y, mod)
        assert f % 2 == 0, "level-2 form must be even on quotient representatives"
        return (f >> 1) & 1

    table = {(a, b): bit(a, b) for a in reps for b in reps}
    if corrupt:
        nz = [r for r in reps if any(r)]
        table[(nz[0], nz[1])] ^= 1

    counterexample = None
    well_defined = True
    for a in reps:
        for x in cosets[a]:
            for b in reps:
                if bit(x, b) != table[(a, b)]:
                    well_defined = False
                    counterexample = ("representative", a, x, b)
                    break
            if not well_defined:
                break
        if not well_defined:
            break

    alternating = all(table[(a, a)] == 0 for a in reps)
    bilinear = True
    if counterexample is None:
        for a in reps:
            for b in reps:
                ab = tag(vec_add(a, b, mod))
                for c in reps:
                    if table[(ab, c)] != table[(a, c)] ^ table[(b, c)]:
                        bilinear = False
                        counterexample = ("bilinearity", a, b, c)
                        break
                if not bilinear:
                    break
            if not bilinear:
                break
    zero = tag((0,) * DIM)
    nondegenerate = all(
        any(table[(a, b)] for b in reps) for a in reps if a != zero
    )
    passed = well_defined and alternating and bilinear and nondegenerate
    return {
        "passed": passed,
        "well_defined": well_defined,
        "alternating": alternating,
        "bilinear": bilinear,
        "nondegenerate": nondegenerate,
        "counterexample": counterexample,
    }


# -- the symplectic group: enumeration, lifting, sampling ---------------------


def _block(a, b, c, d):
    return (
        (a[0][0], a[0][1], b[0][0], b[0][1]),
        (a[1][0], a[1][1], b[1][0], b[1][1]),
        (c[0][0], c[0][1], d[0][0], d[0][1]),
        (c[1][0], c[1][1], d[1][0], d[1][1]),
    )


def symplectic_generators() -> tuple:
    """Words over these matrices cover the symplectic group mod 2^n."""
    i2 = ((1, 0), (0, 1))
    z2 = ((0, 0), (0, 0))
    gens = []
    for s in (((1, 0), (0, 0)), ((0, 0), (0, 1)), ((0, 1), (1, 0))):
        neg = tuple(tuple(-c for c in row) for row in s)
        gens.append(_block(i2, s, z2, i2))
        gens.append(_block(i2, neg, z2, i2))
        gens.append(_block(i2, z2, s, i2))
        gens.append(_block(i2, z2, neg, i2))
    gens.append(OMEGA)
    gens.append(tuple(tuple(-c for c in row) for row in OMEGA))
    for a, ainv_t in (
        (((1, 1), (0, 1)), ((1, 0), (-1, 1))),
        (((0, 1), (1, 0)), ((0, 1), (1, 0))),
    ):
        gens.append(_block(a, z2, z2, ainv_t))
    return tuple(gens)


def symplectic_group(n: int) -> list:
    """The full symplectic group mod 2^n by closure (guarded for n <= 2)."""
    if n > 2:
        raise ValueError("exhaustive symplectic enumeration is capped at level 2")
    mod = 1 << n
    gens = [reduce_matrix(g, mod) for g in symplectic_generators()]
    seen = {identity(mod)}
    frontier = [identity(mod)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod_m = mat_mul(m, g, mod)
                if prod_m not in seen:
                    seen.add(prod_m)
                    nxt.append(prod_m)
        frontier = nxt
    expected = 720 if n == 1 else 737280
    if len(seen) != expected:
        raise AssertionError(f"symplectic closure has order {len(seen)}, expected {expected}")
    return sorted(seen)


def sample_symplectic(n: int, count: int, seed: int):
    """A seeded random walk over symplectic matrices mod 2^n."""
    mod = 1 << n
    gens = [reduce_matrix(g, mod) for g in symplectic_generators()]
    rng = random.Random(seed)
    current = identity(mod)
    for _ in range(32):
        current = mat_mul(current, rng.choice(gens), mod)
    for _ in range(count):
        current = mat_mul(current, rng.choice(gens), mod)
        yield current


def apply_matrix(m, v: Vertex) -> Vertex:
    """Transform a vertex subgroup by a matrix (reduced to the right level)."""
    mod = 1 << v.m
    mm = reduce_matrix(m, mod)
    return Vertex(v.m, howell(tuple(mat_vec(mm, g, mod) for g in v.gens), v.m))


def fixes_all(m, verts) -> Optional[Vertex]:
    """None if m fixes every vertex setwise; else the first moved vertex."""
    for v in verts:
        if v.m == 0:
            continue
        if apply_matrix(m, v) != v:
            return v
    return None


def scalar_fix_level1() -> list:
    """Exhaustive search: symplectic matrices mod 2 fixing all 15 Lagrangians."""
    verts = lagrangians()
    return [m for m in symplectic_group(1) if fixes_all(m, verts) is None]


def scalar_fix_level2_sampled(samples: int, seed: int) -> dict:
    """Check that scalars fix the radius-2 ball and sampled non-scalars move it.

    Returns counts plus the first offending matrix, if any."""
    verts = sorted(ball(2), key=lambda v: (v.m, v.gens))
    scalars = scalar_matrices(2)
    for s in scalars:
        moved = fixes_all(s, verts)
        if moved is not None:
            return {"passed": False, "scalar_moved": (s, moved)}
    scalar_set = set(scalars)
    nonscalar = 0
    for m in sample_symplectic(2, samples, seed):
        if m in scalar_set:
            continue
        nonscalar += 1
        if fixes_all(m, verts) is None:
            return {"passed": False, "nonscalar_fixer": m, "nonscalar_checked": nonscalar}
    return {"passed": True, "nonscalar_checked": nonscalar, "scalars": len(scalars)}


def scalar_fix_level2_exhaustive() -> list:
    """All symplectic matrices mod 4 fixing the radius-2 ball (expect +-I)."""
    verts = sorted(ball(2), key=lambda v: (v.m, v.gens))
    return [m for m in symplectic_group(2) if fixes_all(m, verts) is None]


def scalar_fix(level: int, mode: str = "exhaustive", samples: int = 100000, seed: int = 0):
    if level == 1:
        return scalar_fix_level1()
    if level == 2:
        if mode == "exhaustive":
            return scalar_fix_level2_exhaustive()
        return scalar_fix_level2_sampled(samples, seed)
    raise ValueError("scalar fixing checks are supported at levels 1 and 2 only")
