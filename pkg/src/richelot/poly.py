"""Dense univariate polynomials over tower elements, and points of P^1.

Coefficients are stored low to high with the leading coefficient nonzero
(the zero polynomial has an empty coefficient tuple).  Degrees stay small
throughout (at most 6), so no sparse or asymptotically fast arithmetic is
attempted.  GCDs are computed by exact Euclidean division over the tower
field, which is enough to decide squarefreeness via gcd(f, f').
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .tower import TowerContext, TowerElement, adjoin_sqrt


class PolynomialError(ValueError):
    pass


class ProjPoint:
    """A point of the projective line: a tower element or infinity."""

    __slots__ = ("value",)

    _INF: Optional["ProjPoint"] = None

    def __init__(self, value: Optional[TowerElement]):
        self.value = value

    @classmethod
    def infinity(cls) -> "ProjPoint":
        if cls._INF is None:
            cls._INF = cls(None)
        return cls._INF

    @classmethod
    def finite(cls, value: TowerElement) -> "ProjPoint":
        return cls(value)

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.value == other.value

    def __hash__(self):
        return hash(None) if self.is_infinity else hash(self.value)

    def sort_key(self):
        # infinity sorts after every finite point
        if self.is_infinity:
            return (1,)
        return (0, self.value.sort_key())

    def __str__(self):
        return "inf" if self.is_infinity else str(self.value)

    def __repr__(self):
        return f"ProjPoint({self})"


def parse_point(s: str, ctx: TowerContext):
    """Parse 'inf' or a canonical element string; returns (point, ctx)."""
    from .tower import parse_element

    s = s.strip()
    if s == "inf":
        return ProjPoint.infinity(), ctx
    elem, ctx = parse_element(s, ctx)
    return ProjPoint.finite(elem), ctx


class Poly:
    """Polynomial with TowerElement coefficients in one tower."""

    __slots__ = ("coeffs", "context")

    def __init__(self, coeffs: Iterable[TowerElement], context: Optional[TowerContext] = None):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)
        if context is None:
            if not cs:
                raise PolynomialError("zero polynomial needs an explicit context")
            context = cs[0].context
            for c in cs[1:]:
                context = context.join(c.context)
        self.context = context

    @classmethod
    def from_rationals(cls, values: Sequence, ctx: TowerContext) -> "Poly":
        return cls([ctx.rational(Fraction(v)) for v in values], ctx)

    @classmethod
    def x_minus(cls, r: TowerElement) -> "Poly":
        return cls([-r, r.context.one()], r.context)

    @classmethod
    def zero(cls, ctx: TowerContext) -> "Poly":
        return cls([], ctx)

    @classmethod
    def one(cls, ctx: TowerContext) -> "Poly":
        return cls([ctx.one()], ctx)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial mapped to -1."""
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> TowerElement:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.context.zero()

    def leading(self) -> TowerElement:
        if self.is_zero():
            raise PolynomialError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        ctx = self.context.join(other.context)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self.coeff(i) + other.coeff(i) for i in range(n)], ctx)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs], self.context)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        ctx = self.context.join(other.context)
        if self.is_zero() or other.is_zero():
            return Poly.zero(ctx)
        out = [ctx.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out, ctx)

    def scale(self, c: TowerElement) -> "Poly":
        ctx = self.context.join(c.context)
        return Poly([a * c for a in self.coeffs], ctx)

    def derivative(self) -> "Poly":
        return Poly(
            [self.coeffs[i] * i for i in range(1, len(self.coeffs))], self.context
        )

    def __call__(self, x: TowerElement) -> TowerElement:
        acc = self.context.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "Poly":
        lc = self.leading()
        if lc == 1:
            return self
        return self.scale(lc.inverse())

    def divmod(self, other: "Poly") -> tuple:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        ctx = self.context.join(other.context)
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly.zero(ctx), Poly(rem, ctx)
        inv_lead = other.leading().inverse()
        quot = [ctx.zero()] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + other.degree] * inv_lead
            quot[k] = c
            if not c.is_zero():
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return Poly(quot, ctx), Poly(rem[: other.degree], ctx)

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def gcd(self, other: "Poly") -> "Poly":
        """Monic gcd over the tower field."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a.monic()

    def is_squarefree(self) -> bool:
        """True iff the polynomial has no repeated roots over the closure."""
        if self.is_zero():
            raise PolynomialError("squarefreeness of the zero polynomial is undefined")
        if self.degree == 0:
            return True
        return self.gcd(self.derivative()).degree == 0

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"({c})*x")
            else:
                parts.append(f"({c})*x^{i}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def quad_roots(f: Poly, ctx: Optional[TowerContext] = None) -> tuple:
    """Both roots of a squarefree quadratic, extending the tower if needed.

    Returns (root1, root2, context, radicand) where radicand is the
    discriminant when a new level was adjoined and None otherwise.  The two
    roots are ordered by their sort keys, and Vieta's relations hold
    exactly: (x - r1)(x - r2) equals the monic normalization of f.
    """
    if f.degree != 2:
        raise PolynomialError(f"expected a quadratic, got degree {f.degree}")
    if ctx is None:
        ctx = f.context
    else:
        ctx = ctx.join(f.context)
    a, b, c = f.coeff(2), f.coeff(1), f.coeff(0)
    disc = b * b - 4 * a * c
    if disc.is_zero():
        raise PolynomialError("repeated root: discriminant is zero")
    disc = ctx.lift(disc)
    new_ctx, s = adjoin_sqrt(disc)
    radicand = disc if new_ctx is not ctx else None
    inv2a = (a + a).inverse()
    r1 = (-b + s) * inv2a
    r2 = (-b - s) * inv2a
    if r2.sort_key() < r1.sort_key():
        r1, r2 = r2, r1
    return r1, r2, new_ctx, radicand
