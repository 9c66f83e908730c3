"""Exact arithmetic in towers of quadratic extensions of Q.

A tower is described by a ``TowerContext``: an immutable chain of radicands
d_1, d_2, ..., d_h where each d_k is a nonzero element of the height-(k-1)
subtower that is not a square there (towers are reduced).  The field of a
height-h context is Q(sqrt(d_1), ..., sqrt(d_h)).

Elements are stored flat: a map {mask: Fraction} over the square-free
monomials prod_{k in mask} sqrt(d_k), with no zero coefficients.  This is
a normal form (semantic equality is map equality within one context), and
it demotes automatically: an element not involving the top generators
simply has no high bits in its masks.  Multiplication recurses by
Karatsuba splitting at the top generator, so sparse elements cost what
their support warrants.  The pair view a + b*sqrt(d_k) of the classical
presentation is available through ``split_top`` and drives serialization,
ordering, and the square-root algorithm.

Contexts are append-only; elements of a context remain valid in any
extension of it.  Mixing elements whose contexts are not in a prefix
relation raises ``ContextMismatchError``.  All values are immutable and
all operations are pure, so contexts and elements can be shared across
threads (the memoized radicand-product tables are filled idempotently).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Optional, Union


class TowerError(ValueError):
    pass


class ContextMismatchError(TowerError):
    """Raised when elements of unrelated contexts are combined."""


_CONTEXT_COUNTER = [0]

Rational = Union[int, Fraction]

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


class TowerContext:
    """Immutable chain of quadratic radicands over Q."""

    __slots__ = ("radicands", "ident", "_keys")

    def __init__(self, radicands: tuple = ()):
        self.radicands = radicands
        _CONTEXT_COUNTER[0] += 1
        self.ident = _CONTEXT_COUNTER[0]
        self._keys: Optional[tuple] = None

    @property
    def height(self) -> int:
        return len(self.radicands)

    def radicand(self, level: int) -> "TowerElement":
        """The radicand d_level, an element of the height-(level-1) subtower."""
        return self.radicands[level - 1]

    def radicand_keys(self) -> tuple:
        if self._keys is None:
            self._keys = tuple(str(d) for d in self.radicands)
        return self._keys

    def is_prefix_of(self, other: "TowerContext") -> bool:
        if self.height > other.height:
            return False
        return other.radicand_keys()[: self.height] == self.radicand_keys()

    def join(self, other: "TowerContext") -> "TowerContext":
        """The deeper of two prefix-compatible contexts."""
        if self is other:
            return self
        if self.is_prefix_of(other):
            return other
        if other.is_prefix_of(self):
            return self
        raise ContextMismatchError(
            "contexts have incompatible radicand lists: "
            f"{self.radicand_keys()} vs {other.radicand_keys()}"
        )

    def extend(self, radicand: "TowerElement", validate: bool = True) -> "TowerContext":
        """Append one level with the given radicand; never mutates self."""
        radicand = self._as_element(radicand)
        if radicand.is_zero():
            raise TowerError("radicand must be nonzero")
        if validate and _flat_sqrt(self, radicand.flat, self.height) is not None:
            raise TowerError(f"radicand {radicand} is a square; tower must stay reduced")
        return TowerContext(self.radicands + (radicand,))

    def _as_element(self, value) -> "TowerElement":
        if isinstance(value, TowerElement):
            value.context.join(self)
            return value
        return self.rational(value)

    def rational(self, p: Rational, q: Rational = 1) -> "TowerElement":
        v = Fraction(p, q) if q != 1 else Fraction(p)
        return TowerElement(self, {0: v} if v else {})

    def zero(self) -> "TowerElement":
        return TowerElement(self, {})

    def one(self) -> "TowerElement":
        return self.rational(1)

    def generator(self, level: int) -> "TowerElement":
        """sqrt(d_level) as an element of this context."""
        if not 1 <= level <= self.height:
            raise TowerError(f"no generator at level {level} (height {self.height})")
        return TowerElement(self, {1 << (level - 1): Fraction(1)})

    def lift(self, x: "TowerElement") -> "TowerElement":
        """Re-root an element of a prefix context into this context.

        Needed before square testing or adjoining: squareness depends on
        the full tower, not on the (possibly shallower) context the value
        normalized into.
        """
        if x.context is self:
            return x
        if not x.context.is_prefix_of(self):
            raise ContextMismatchError(
                f"cannot lift: {x.context!r} is not a prefix of {self!r}"
            )
        return TowerElement(self, x.flat)

    def __repr__(self):
        return f"TowerContext(height={self.height}, id={self.ident})"


#: the rational base context; height-0 contexts are all mutually compatible
QQ = TowerContext()


# -- flat kernel -------------------------------------------------------------


def _flat_add(a: dict, b: dict) -> dict:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, _ZERO) + c
        if s:
            out[m] = s
        elif m in out:
            del out[m]
    return out


def _flat_neg(a: dict) -> dict:
    return {m: -c for m, c in a.items()}


def _flat_scale(a: dict, c: Fraction) -> dict:
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def _flat_mul(ctx: TowerContext, a: dict, b: dict) -> dict:
    """Product via Karatsuba on the top generator.

    Splitting x = x0 + g*x1 at the highest generator present gives
    (a0 b0 + d a1 b1) + g*((a0+a1)(b0+b1) - a0 b0 - a1 b1); the three
    recursive products keep the work near the true support sizes.
    """
    if not a or not b:
        return {}
    la = _top_level(a)
    lb = _top_level(b)
    level = la if la > lb else lb
    if level == 0:
        return {0: a[0] * b[0]}
    bit = 1 << (level - 1)
    a0, a1 = _flat_split(a, level)
    b0, b1 = _flat_split(b, level)
    m00 = _flat_mul(ctx, a0, b0)
    if not a1 and not b1:
        return m00
    m11 = _flat_mul(ctx, a1, b1)
    cross = _flat_mul(ctx, _flat_add(a0, a1), _flat_add(b0, b1))
    cross = _flat_add(cross, _flat_neg(_flat_add(m00, m11)))
    out = m00
    if m11:
        out = _flat_add(out, _flat_mul(ctx, m11, ctx.radicands[level - 1].flat))
    result = dict(out)
    for m, c in cross.items():
        result[m | bit] = c
    return result


def _top_level(a: dict) -> int:
    level = 0
    for m in a:
        if m:
            b = m.bit_length()
            if b > level:
                level = b
    return level


def _flat_split(a: dict, level: int) -> tuple:
    """a = a0 + sqrt(d_level) * a1 as flat maps."""
    bit = 1 << (level - 1)
    a0: dict = {}
    a1: dict = {}
    for m, c in a.items():
        if m & bit:
            a1[m ^ bit] = c
        else:
            a0[m] = c
    return a0, a1


def _flat_inv(ctx: TowerContext, a: dict) -> dict:
    if not a:
        raise ZeroDivisionError("inverse of zero tower element")
    level = _top_level(a)
    if level == 0:
        return {0: 1 / a[0]}
    a0, a1 = _flat_split(a, level)
    if not a1:
        return _flat_inv(ctx, a0)
    d = ctx.radicands[level - 1].flat
    norm = _flat_add(
        _flat_mul(ctx, a0, a0), _flat_neg(_flat_mul(ctx, _flat_mul(ctx, a1, a1), d))
    )
    if not norm:
        raise TowerError(f"norm vanished at level {level}; context is not reduced")
    ninv = _flat_inv(ctx, norm)
    bit = 1 << (level - 1)
    out = _flat_mul(ctx, a0, ninv)
    for m, c in _flat_mul(ctx, a1, ninv).items():
        out[m | bit] = -c
    return out


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def _flat_sqrt(ctx: TowerContext, a: dict, h: int) -> Optional[dict]:
    """Square root of a inside the height-h subtower of ctx, or None.

    For a = u + v*sqrt(d_h): if v = 0, either u or u*d_h must be a square
    lower down; otherwise the norm u^2 - v^2 d_h must be a square w^2 and
    (u + w)/2 or (u - w)/2 a square p^2, giving p + (v/2p) sqrt(d_h).
    """
    if not a:
        return {}
    if h == 0:
        if list(a) != [0]:
            return None
        r = _rational_sqrt(a[0])
        return None if r is None else {0: r}
    u, v = _flat_split(a, h)
    d = ctx.radicands[h - 1].flat
    bit = 1 << (h - 1)
    if not v:
        r = _flat_sqrt(ctx, u, h - 1)
        if r is not None:
            return r
        r = _flat_sqrt(ctx, _flat_mul(ctx, u, _flat_inv(ctx, d)), h - 1)
        if r is not None:
            # r uses only bits below h, so attaching sqrt(d_h) is a mask shift
            return {m | bit: c for m, c in r.items()}
        return None
    norm = _flat_add(
        _flat_mul(ctx, u, u), _flat_neg(_flat_mul(ctx, _flat_mul(ctx, v, v), d))
    )
    w = _flat_sqrt(ctx, norm, h - 1)
    if w is None:
        return None
    for ws in (w, _flat_neg(w)):
        half = _flat_scale(_flat_add(u, ws), _HALF)
        p = _flat_sqrt(ctx, half, h - 1)
        if p:
            q = _flat_mul(ctx, v, _flat_inv(ctx, _flat_scale(p, Fraction(2))))
            out = dict(p)
            for m, c in q.items():
                out[m | bit] = c
            return out
    return None


# -- elements ----------------------------------------------------------------


class TowerElement:
    """An element of a quadratic tower, in flat normal form."""

    __slots__ = ("context", "flat", "_str", "_key", "_hash")

    def __init__(self, context: TowerContext, flat: dict):
        self.context = context
        self.flat = flat
        self._str: Optional[str] = None
        self._key = None
        self._hash: Optional[int] = None

    # -- basic predicates ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.flat

    def is_rational(self) -> bool:
        return not any(self.flat)

    def as_fraction(self) -> Fraction:
        if any(self.flat):
            raise TowerError(f"{self} is not rational")
        return self.flat.get(0, _ZERO)

    @property
    def level(self) -> int:
        """Index of the topmost generator involved (0 for rationals)."""
        return _top_level(self.flat)

    def split_top(self) -> tuple:
        """(a, b, k) with self = a + b*sqrt(d_k); k = 0 means rational."""
        k = self.level
        if k == 0:
            return self, self.context.zero(), 0
        a, b = _flat_split(self.flat, k)
        return TowerElement(self.context, a), TowerElement(self.context, b), k

    def __bool__(self) -> bool:
        return bool(self.flat)

    # -- coercion ----------------------------------------------------------

    def _coerce(self, other) -> Optional["TowerElement"]:
        if isinstance(other, TowerElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.context.rational(other)
        return None

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        ctx = self.context.join(other.context)
        return TowerElement(ctx, _flat_add(self.flat, other.flat))

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.context, _flat_neg(self.flat))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        ctx = self.context.join(other.context)
        return TowerElement(ctx, _flat_add(self.flat, _flat_neg(other.flat)))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        ctx = self.context.join(other.context)
        return TowerElement(ctx, _flat_mul(ctx, self.flat, other.flat))

    __rmul__ = __mul__

    def inverse(self) -> "TowerElement":
        """Multiplicative inverse; raises ZeroDivisionError on zero."""
        return TowerElement(self.context, _flat_inv(self.context, self.flat))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        ctx = self.context.join(other.context)
        return TowerElement(ctx, _flat_mul(ctx, self.flat, _flat_inv(ctx, other.flat)))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.context.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison and ordering --------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        self.context.join(other.context)
        return self.flat == other.flat

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.flat.items())))
        return self._hash

    def sort_key(self):
        """Deterministic total order key; meaningful within one context."""
        if self._key is None:
            self._key = _key_of(self.flat)
        return self._key

    # -- square roots --------------------------------------------------------

    def sqrt(self) -> Optional["TowerElement"]:
        """A square root within this element's context, or None.

        The returned root is sign-normalized: of the two roots the one with
        the lexicographically smaller sort key is chosen, so results are
        reproducible across runs.
        """
        r = _flat_sqrt(self.context, self.flat, self.context.height)
        if r is None:
            return None
        neg = _flat_neg(r)
        if _key_of(neg) < _key_of(r):
            r = neg
        return TowerElement(self.context, r)

    def is_square(self) -> bool:
        return _flat_sqrt(self.context, self.flat, self.context.height) is not None

    # -- serialization --------------------------------------------------------

    def __str__(self):
        if self._str is None:
            self._str = _str_of(self.context, self.flat)
        return self._str

    def __repr__(self):
        return f"TowerElement({self})"


def _key_of(a: dict):
    level = _top_level(a)
    if level == 0:
        q = a.get(0, _ZERO)
        return (0, q.numerator, q.denominator)
    a0, a1 = _flat_split(a, level)
    return (level, _key_of(a0), _key_of(a1))


def _str_of(ctx: TowerContext, a: dict) -> str:
    level = _top_level(a)
    if level == 0:
        q = a.get(0, _ZERO)
        return f"{q.numerator}/{q.denominator}"
    a0, a1 = _flat_split(a, level)
    dk = ctx.radicand_keys()[level - 1]
    return f"({_str_of(ctx, a0)} + ({_str_of(ctx, a1)})*sqrt({dk}))"


def adjoin_sqrt(x: TowerElement) -> tuple:
    """Return (context, root) with root*root == x.

    If x is already a square, the context is unchanged and the canonical
    root is returned.  Otherwise the context is extended by one level with
    radicand x and the new generator is the root.  For x == 0 the unchanged
    context and 0 are returned; callers that need a proper extension must
    check for this degenerate case.
    """
    if x.is_zero():
        return x.context, x
    r = x.sqrt()
    if r is not None:
        return x.context, r
    ctx = x.context.extend(x, validate=False)
    return ctx, ctx.generator(ctx.height)


# -- parsing ---------------------------------------------------------------

_RATIONAL_RE = re.compile(r"-?\d+(/\d+)?")


def _parse_expr(s: str, pos: int):
    if pos < len(s) and s[pos] == "(":
        a, pos = _parse_expr(s, pos + 1)
        if s[pos : pos + 4] != " + (":
            raise TowerError(f"expected ' + (' at position {pos} in {s!r}")
        b, pos = _parse_expr(s, pos + 4)
        if s[pos : pos + 7] != ")*sqrt(":
            raise TowerError(f"expected ')*sqrt(' at position {pos} in {s!r}")
        d, pos = _parse_expr(s, pos + 7)
        if s[pos : pos + 2] != "))":
            raise TowerError(f"expected '))' at position {pos} in {s!r}")
        return ("pair", a, b, d), pos + 2
    m = _RATIONAL_RE.match(s, pos)
    if not m:
        raise TowerError(f"expected rational at position {pos} in {s!r}")
    return ("rat", Fraction(m.group(0))), m.end()


def _build_expr(desc, ctx: TowerContext):
    if desc[0] == "rat":
        return ctx.rational(desc[1]), ctx
    _, a_desc, b_desc, d_desc = desc
    a, ctx = _build_expr(a_desc, ctx)
    b, ctx = _build_expr(b_desc, ctx)
    d, ctx = _build_expr(d_desc, ctx)
    key = str(d)
    for lvl, k in enumerate(ctx.radicand_keys(), start=1):
        if k == key:
            g = ctx.generator(lvl)
            break
    else:
        ctx = ctx.extend(d)
        g = ctx.generator(ctx.height)
    return ctx.lift(a) + ctx.lift(b) * g, ctx


def parse_element(s: str, ctx: Optional[TowerContext] = None) -> tuple:
    """Parse the canonical nested-radical grammar.

    Returns (element, context); the context is extended as new radicands
    appear, so several related strings can be parsed into one shared
    context.  Round trip is exact: str(parse_element(str(x))[0]) == str(x).
    """
    if ctx is None:
        ctx = TowerContext()
    desc, pos = _parse_expr(s.strip(), 0)
    if pos != len(s.strip()):
        raise TowerError(f"trailing input at position {pos} in {s!r}")
    elem, ctx = _build_expr(desc, ctx)
    return elem, ctx
