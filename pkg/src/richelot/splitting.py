"""Triples of root pairs, quadratic splittings, and the Richelot operator.

A branch set of six points of P^1 can be grouped into three disjoint pairs
in 15 ways; permutation classes of such groupings are the combinatorial
skeleton of everything here.  A grouping determines a 3x3 coefficient
matrix (rows are the monic quadratics, or the monic linear factor for the
pair containing infinity), and the Richelot operator acts by the dual
matrix

    dual(A) = cof(A) * [[0,0,1],[0,-2,0],[1,0,0]]

whose rows are exactly the Wronskian brackets H_i = [G_{i+1}, G_{i+2}].
The dual is built from cofactors, so it exists even when det(A) = 0; the
degenerate determinant is rejected only where curve construction or point
transport genuinely needs it.

Sign conventions are pinned by two exact identities, both covered by
tests:

* det(dual(A)) = 2 det(A)^2 for every 3x3 matrix A;
* transported points land exactly on the curve produced here, namely
  y^2 = -det(G)^{-1} D H_1 H_2 H_3 (the sign comes with the bracket
  orientation above; with the opposite orientation the identities trade
  places).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

from .poly import Poly, PolynomialError, ProjPoint, quad_roots
from .tower import TowerContext, TowerElement


class MembershipError(ValueError):
    """A matrix row fails the squarefree degree-1-or-2 requirements."""


class SplitJacobianError(ValueError):
    """det(G) = 0: the Jacobian splits and no Richelot curve exists."""


class DegeneratePointError(ValueError):
    """A point transport hit a configuration the formulas do not cover."""


def _pair_key(pair):
    return tuple(p.sort_key() for p in pair)


def _sorted_pair(a: ProjPoint, b: ProjPoint):
    return (a, b) if a.sort_key() <= b.sort_key() else (b, a)


class PairTriple:
    """Three pairwise-disjoint unordered 2-element subsets of P^1."""

    __slots__ = ("pairs",)

    def __init__(self, pairs):
        ps = tuple(_sorted_pair(*p) for p in pairs)
        if len(ps) != 3:
            raise ValueError("need exactly three pairs")
        flat = [p for pair in ps for p in pair]
        for a, b in combinations(flat, 2):
            if a == b:
                raise ValueError("pairs are not disjoint")
        if sum(1 for pair in ps for p in pair if p.is_infinity) > 1:
            raise ValueError("at most one entry may be infinity")
        self.pairs = ps

    def support(self) -> tuple:
        """The six underlying points, sorted."""
        flat = [p for pair in self.pairs for p in pair]
        return tuple(sorted(flat, key=lambda p: p.sort_key()))

    def __eq__(self, other):
        if not isinstance(other, PairTriple):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        return f"PairTriple({self.pairs!r})"


class SplittingClass:
    """A PairTriple up to permutation of the three pairs (canonical order)."""

    __slots__ = ("pairs", "_key")

    def __init__(self, triple):
        if isinstance(triple, PairTriple):
            pairs = triple.pairs
        else:
            pairs = PairTriple(triple).pairs
        self.pairs = tuple(sorted(pairs, key=_pair_key))
        self._key = None

    def support(self) -> tuple:
        flat = [p for pair in self.pairs for p in pair]
        return tuple(sorted(flat, key=lambda p: p.sort_key()))

    def sort_key(self):
        if self._key is None:
            self._key = tuple(_pair_key(p) for p in self.pairs)
        return self._key

    def __eq__(self, other):
        if not isinstance(other, SplittingClass):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def to_json(self):
        return [[str(p) for p in pair] for pair in self.pairs]

    def __repr__(self):
        return f"SplittingClass({self.to_json()})"


def enumerate_classes(points: Sequence[ProjPoint]):
    """All 15 pair-partitions of a 6-point branch set, in canonical order."""
    pts = list(points)
    if len(pts) != 6:
        raise ValueError(f"branch set must have 6 points, got {len(pts)}")
    for a, b in combinations(pts, 2):
        if a == b:
            raise ValueError("branch set has duplicate points")
    pts.sort(key=lambda p: p.sort_key())

    def pairings(items):
        if not items:
            yield ()
            return
        first = items[0]
        for i in range(1, len(items)):
            pair = (first, items[i])
            rest = items[1:i] + items[i + 1 :]
            for sub in pairings(rest):
                yield (pair,) + sub

    out = [SplittingClass(p) for p in pairings(tuple(pts))]
    assert len(out) == 15
    return out


def matrix_M(triple) -> tuple:
    """Coefficient matrix of a pair triple: rows are the monic factors.

    A finite pair {r, s} gives the row (r*s, -(r+s), 1); a pair {r, inf}
    gives (-r, 1, 0).
    """
    pairs = triple.pairs
    ctx = None
    for pair in pairs:
        for p in pair:
            if not p.is_infinity:
                ctx = p.value.context if ctx is None else ctx.join(p.value.context)
    if ctx is None:
        raise ValueError("triple has no finite points")
    one, zero = ctx.one(), ctx.zero()
    rows = []
    for a, b in pairs:
        if b.is_infinity:
            rows.append((-a.value, one, zero))
        elif a.is_infinity:
            rows.append((-b.value, one, zero))
        else:
            rows.append((a.value * b.value, -(a.value + b.value), one))
    return tuple(rows)


def map_N(matrix, ctx: Optional[TowerContext] = None):
    """Root pairs of the three row polynomials.

    Returns (PairTriple, context, adjunctions) where adjunctions lists
    (row_index, discriminant) for every tower extension that was needed.
    Raises MembershipError when a row is not squarefree of degree 1 or 2,
    or when more than one row is linear.
    """
    if ctx is None:
        for row in matrix:
            for c in row:
                ctx = c.context if ctx is None else ctx.join(c.context)
    pairs = []
    adjoined = []
    linear_rows = 0
    for i, row in enumerate(matrix):
        c0, c1, c2 = row
        if c2.is_zero():
            linear_rows += 1
            if linear_rows > 1:
                raise MembershipError("two linear rows: product cannot be squarefree")
            if c1.is_zero():
                raise MembershipError(f"row {i} is constant")
            r = -(c0 / c1)
            pairs.append((ProjPoint.finite(r), ProjPoint.infinity()))
        else:
            f = Poly([c0, c1, c2])
            try:
                r1, r2, ctx, rad = quad_roots(f, ctx)
            except PolynomialError as exc:
                raise MembershipError(f"row {i}: {exc}") from exc
            if rad is not None:
                adjoined.append((i, rad))
            pairs.append((ProjPoint.finite(r1), ProjPoint.finite(r2)))
    try:
        triple = PairTriple(pairs)
    except ValueError as exc:
        raise MembershipError(f"row polynomials share a root: {exc}") from exc
    return triple, ctx, tuple(adjoined)


def det3(a) -> TowerElement:
    return (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )


def dual_matrix(a) -> tuple:
    """The Richelot dual cof(A) * [[0,0,1],[0,-2,0],[1,0,0]].

    Row i of the dual is the coefficient row of [G_{i+1}, G_{i+2}], the
    Wronskian bracket of the other two row polynomials.  Defined for every
    matrix, including det(A) = 0.
    """
    cof = [[None] * 3 for _ in range(3)]
    idx = ((1, 2), (0, 2), (0, 1))
    for i in range(3):
        ri, rj = idx[i]
        for j in range(3):
            ci, cj = idx[j]
            minor = a[ri][ci] * a[rj][cj] - a[ri][cj] * a[rj][ci]
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    return tuple(
        (cof[i][2], -(cof[i][1] + cof[i][1]), cof[i][0]) for i in range(3)
    )


def richelot_class(cls: SplittingClass, ctx: Optional[TowerContext] = None):
    """The Richelot operator on a splitting class.

    Returns (image class, context, adjunctions); the tower grows by the
    square roots of the row discriminants that are not already squares.
    """
    a = matrix_M(cls)
    triple, ctx, adjoined = map_N(dual_matrix(a), ctx)
    return SplittingClass(triple), ctx, adjoined


def bracket(p: Poly, q: Poly) -> Poly:
    """[p, q] = p q' - q p'."""
    return p * q.derivative() - q * p.derivative()


class QuadraticSplitting:
    """A factorization f = g1 g2 g3 of a curve polynomial, with the curve
    scalar d carried along (the curve is y^2 = d * g1 g2 g3)."""

    __slots__ = ("g1", "g2", "g3", "d", "_det")

    def __init__(self, g1: Poly, g2: Poly, g3: Poly, d: TowerElement):
        self.g1 = g1
        self.g2 = g2
        self.g3 = g3
        self.d = d
        self._det = None

    @property
    def polys(self):
        return (self.g1, self.g2, self.g3)

    def context(self) -> TowerContext:
        ctx = self.g1.context.join(self.g2.context).join(self.g3.context)
        return ctx.join(self.d.context)

    def matrix(self) -> tuple:
        return tuple(tuple(g.coeff(i) for i in range(3)) for g in self.polys)

    def det(self) -> TowerElement:
        if self._det is None:
            self._det = det3(self.matrix())
        return self._det

    def validate(self):
        degs = sorted(g.degree for g in self.polys)
        if degs not in ([1, 2, 2], [2, 2, 2]):
            raise MembershipError(f"factor degrees {degs} are not a quadratic splitting")
        prod = self.g1 * self.g2 * self.g3
        if not prod.is_squarefree():
            raise MembershipError("product of factors is not squarefree")
        return prod

    def product(self) -> Poly:
        return self.g1 * self.g2 * self.g3


class Curve:
    """Hyperelliptic model y^2 = d * f(x) with f squarefree of degree 5
    or 6; branch is the root set plus infinity in degree 5, or None when
    the roots have not been materialized.

    The polynomial, and likewise a quotient-shaped scalar, may be held in
    factored form and are expanded on first access; tree leaves carry
    their curve this way, since nothing ever regroups them further."""

    __slots__ = ("branch", "context", "_d", "_d_parts", "_f", "_factors")

    def __init__(self, d, f, branch, context, factors=None, d_parts=None):
        self._d = d
        self._d_parts = d_parts
        self.branch = branch
        self.context = context
        self._f = f
        self._factors = factors
        if f is None and factors is None:
            raise ValueError("curve needs a polynomial or its factors")
        if d is None and d_parts is None:
            raise ValueError("curve needs a scalar or its parts")

    @property
    def d(self) -> TowerElement:
        if self._d is None:
            num, den = self._d_parts
            self._d = num * den.inverse()
        return self._d

    @property
    def f(self) -> Poly:
        if self._f is None:
            g1, g2, g3 = self._factors
            self._f = g1 * g2 * g3
        return self._f

    @classmethod
    def from_branch_values(cls, alphas, ctx: TowerContext) -> "Curve":
        """The degree-5 curve y^2 = prod (x - alpha_i)."""
        elems = [ctx.lift(a) if isinstance(a, TowerElement) else ctx.rational(a) for a in alphas]
        if len(elems) != 5:
            raise ValueError("expected 5 finite branch values")
        f = Poly.one(ctx)
        for a in elems:
            f = f * Poly.x_minus(a)
        if not f.is_squarefree():
            raise ValueError("branch values are not distinct")
        branch = tuple(
            sorted(
                [ProjPoint.finite(a) for a in elems] + [ProjPoint.infinity()],
                key=lambda p: p.sort_key(),
            )
        )
        return cls(ctx.one(), f, branch, ctx)

    def eval_rhs(self, x: TowerElement) -> TowerElement:
        if self._f is None:
            g1, g2, g3 = self._factors
            return self.d * g1(x) * g2(x) * g3(x)
        return self.d * self.f(x)

    def __repr__(self):
        state = "expanded" if self._f is not None else "factored"
        return f"Curve(D={self.d}, {state}, branch={'yes' if self.branch else 'no'})"


def splitting_for_class(curve: Curve, cls: SplittingClass) -> QuadraticSplitting:
    """The quadratic splitting of curve.f grouped according to cls.

    Rows of matrix_M(cls) multiply exactly to the monic curve polynomial.
    Since both sides are monic and squarefree, it is enough that the class
    points are the curve branch; with materialized branch data that is a
    key comparison, otherwise the product is expanded and compared.
    """
    rows = matrix_M(cls)
    polys = [Poly(list(row)) for row in rows]
    if curve.branch is not None:
        theirs = tuple(p.sort_key() for p in cls.support())
        ours = tuple(p.sort_key() for p in curve.branch)
        if theirs != ours:
            raise MembershipError("splitting class does not match the curve branch")
    else:
        prod = polys[0] * polys[1] * polys[2]
        if prod != curve.f:
            raise MembershipError("splitting class does not match the curve polynomial")
    return QuadraticSplitting(polys[0], polys[1], polys[2], curve.d)


def richelot_splitting(s: QuadraticSplitting) -> QuadraticSplitting:
    """The bracket-built image splitting (H_1, H_2, H_3).

    Its coefficient matrix equals dual_matrix of the source matrix, and
    det(H) = 2 det(G)^2; both identities hold entrywise and exactly.
    """
    g1, g2, g3 = s.polys
    return QuadraticSplitting(bracket(g2, g3), bracket(g3, g1), bracket(g1, g2), s.d)


@dataclass(frozen=True)
class RichelotImage:
    curve: Curve
    image_class: SplittingClass
    adjoined: tuple
    context: TowerContext


def richelot_curve(curve: Curve, s: QuadraticSplitting, with_branch: bool = True, expand: bool = True):
    """The isogenous curve y^2 = -det(G)^{-1} d H_1 H_2 H_3.

    With expand=True the polynomial is expanded and renormalized to be
    monic, the leading scalar moving into the curve scalar; the curve
    equation is carried exactly either way.  With expand=False the curve
    keeps the factored polynomial and the scalar -det(G)^{-1} d verbatim,
    which is the right shape for tree leaves.  When with_branch is true
    the branch points (the roots of the H_i) are materialized, possibly
    extending the tower; the image class groups them by the H factors.
    """
    det = s.det()
    if det.is_zero():
        raise SplitJacobianError(
            "det(G) = 0: Jacobian is isogenous to a product of elliptic curves"
        )
    hs = richelot_splitting(s)
    degs = sorted(h.degree for h in hs.polys)
    if degs not in ([1, 2, 2], [2, 2, 2]):
        raise MembershipError(f"image factor degrees {degs}")
    if expand:
        hh = hs.g1 * hs.g2 * hs.g3
        if hh.degree not in (5, 6):
            raise MembershipError(f"image polynomial has degree {hh.degree}")
        lead = hh.leading()
        new_d = -(det.inverse()) * curve.d * lead
        new_f = hh.scale(lead.inverse())
        factors = None
        d_parts = None
        ctx = new_f.context.join(new_d.context)
    else:
        new_d = None
        d_parts = (-curve.d, det)
        new_f = None
        factors = hs.polys
        ctx = s.context().join(curve.d.context)
    if not with_branch:
        return RichelotImage(Curve(new_d, new_f, None, ctx, factors, d_parts), None, (), ctx)
    triple, ctx, adjoined = map_N(tuple(tuple(h.coeff(i) for i in range(3)) for h in hs.polys), ctx)
    image_class = SplittingClass(triple)
    branch = image_class.support()
    return RichelotImage(Curve(new_d, new_f, branch, ctx, factors, d_parts), image_class, adjoined, ctx)


def pushforward_point(
    curve: Curve, s: QuadraticSplitting, x0: TowerElement, y0: TowerElement
):
    """Transport the divisor class [(x0, y0) - (alpha, 0)] through the
    Richelot isogeny.

    Returns (((z1, t1), (z2, -t2)), context).  Each output point satisfies
    the image curve equation t^2 = d' f'(z) exactly; this is asserted.
    The z_i are the roots of G2(x0) H2(z) + G3(x0) H3(z) and

        t_i = d * G2(x0) H2(z_i) (x0 - z_i) / y0.
    """
    if y0.is_zero():
        raise DegeneratePointError("y0 = 0: transport is undefined at branch points")
    if y0 * y0 != curve.eval_rhs(x0):
        raise DegeneratePointError("(x0, y0) does not satisfy the curve equation")
    det = s.det()
    if det.is_zero():
        raise SplitJacobianError("det(G) = 0: no Richelot isogeny")
    hs = richelot_splitting(s)
    g2x = s.g2(x0)
    g3x = s.g3(x0)
    zpoly = hs.g2.scale(g2x) + hs.g3.scale(g3x)
    if zpoly.degree != 2:
        raise DegeneratePointError(
            f"z-quadratic degenerated to degree {zpoly.degree} at x0 = {x0}"
        )
    ctx = curve.context.join(s.context()).join(x0.context).join(y0.context)
    try:
        z1, z2, ctx, _ = quad_roots(zpoly, ctx)
    except PolynomialError as exc:
        raise DegeneratePointError(f"z-quadratic is not squarefree: {exc}") from exc
    image = richelot_curve(curve, s, with_branch=False)
    inv_y0 = y0.inverse()
    points = []
    for z in (z1, z2):
        t = curve.d * g2x * hs.g2(z) * (x0 - z) * inv_y0
        if t * t != image.curve.d * image.curve.f(z):
            raise AssertionError("transported point is off the image curve")
        points.append((z, t))
    (za, ta), (zb, tb) = points
    return ((za, ta), (zb, -tb)), ctx
