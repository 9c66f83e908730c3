"""The divisor model of 2-torsion on a genus-2 Jacobian.

Elements are even subsets U of the six branch labels modulo
complementation, written in a canonical form of size 0 or 2.  The group
law is symmetric difference, and the Weil pairing is (-1)^|U ∩ V| on
canonical representatives; on any even representatives this formula is
bilinear, alternating, and invariant under complementation because the
branch set has even size.  Isotropy of two classes is therefore exactly
disjointness of their canonical representatives.

Everything here works on abstract labels rather than field values: the
combinatorics does not depend on where the branch points live.  The bridge
to actual points of P^1 is made by the tree builder.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable


class TwoTorsion:
    """A 2-torsion class e_U over a fixed 6-element branch label set."""

    __slots__ = ("branch", "subset")

    def __init__(self, branch: Iterable, subset: Iterable):
        branch = frozenset(branch)
        if len(branch) != 6:
            raise ValueError(f"branch set must have 6 labels, got {len(branch)}")
        u = frozenset(subset)
        if not u <= branch:
            raise ValueError("subset is not contained in the branch set")
        if len(u) % 2:
            raise ValueError("subset must have even size")
        if len(u) > 2:
            u = branch - u
        self.branch = branch
        self.subset = u

    @classmethod
    def identity(cls, branch) -> "TwoTorsion":
        return cls(branch, ())

    def is_identity(self) -> bool:
        return not self.subset

    def __add__(self, other: "TwoTorsion") -> "TwoTorsion":
        if self.branch != other.branch:
            raise ValueError("elements live over different branch sets")
        return TwoTorsion(self.branch, self.subset ^ other.subset)

    def __eq__(self, other):
        if not isinstance(other, TwoTorsion):
            return NotImplemented
        return self.branch == other.branch and self.subset == other.subset

    def __hash__(self):
        return hash((self.branch, self.subset))

    def sort_key(self):
        return tuple(sorted(self.subset))

    def __repr__(self):
        return f"e{sorted(self.subset)}"


def pairing(x: TwoTorsion, y: TwoTorsion) -> int:
    """Weil pairing value, +1 or -1."""
    if x.branch != y.branch:
        raise ValueError("elements live over different branch sets")
    return -1 if len(x.subset & y.subset) % 2 else 1


def all_elements(branch) -> list:
    """The 16 classes, identity first, then sorted by representative."""
    branch = frozenset(branch)
    out = [TwoTorsion.identity(branch)]
    seen = {out[0].subset}
    for pair in combinations(sorted(branch), 2):
        e = TwoTorsion(branch, pair)
        if e.subset not in seen:
            seen.add(e.subset)
            out.append(e)
    out[1:] = sorted(out[1:], key=TwoTorsion.sort_key)
    return out


def is_isotropic_subgroup(elems) -> bool:
    elems = list(elems)
    return all(pairing(a, b) == 1 for a, b in combinations(elems, 2))


def subgroup_for_pairs(branch, pairs) -> frozenset:
    """{e_0, e_R1, e_R2, e_R3} for a partition of the branch into pairs."""
    branch = frozenset(branch)
    elems = {TwoTorsion.identity(branch)}
    for p in pairs:
        elems.add(TwoTorsion(branch, p))
    if len(elems) != 4:
        raise ValueError("pairs do not define four distinct classes")
    return frozenset(elems)


def label_partitions(branch) -> list:
    """The 15 partitions of the branch labels into three pairs."""
    labels = sorted(frozenset(branch))
    if len(labels) != 6:
        raise ValueError("branch set must have 6 labels")

    def rec(items):
        if not items:
            yield ()
            return
        first = items[0]
        for i in range(1, len(items)):
            pair = (first, items[i])
            rest = items[1:i] + items[i + 1 :]
            for sub in rec(rest):
                yield (pair,) + sub

    return [tuple(tuple(sorted(p)) for p in part) for part in rec(tuple(labels))]


def maximal_isotropics(branch) -> list:
    """All maximal isotropic subgroups of the 16-element group.

    Each is the order-4 subgroup attached to a pair partition, and there
    are exactly 15 of them; this count and the isotropy of each subgroup
    are rechecked on the fly.
    """
    branch = frozenset(branch)
    out = []
    seen = set()
    for part in label_partitions(branch):
        sub = subgroup_for_pairs(branch, part)
        assert is_isotropic_subgroup(sub)
        key = frozenset(e.subset for e in sub)
        assert key not in seen
        seen.add(key)
        out.append(sub)
    assert len(out) == 15
    return out


def permute_element(sigma: dict, x: TwoTorsion) -> TwoTorsion:
    """Relabel an element along a permutation of the branch labels."""
    branch = frozenset(sigma[b] for b in x.branch)
    return TwoTorsion(branch, frozenset(sigma[b] for b in x.subset))


def permute_partition(sigma: dict, pairs):
    """Relabel a pair partition along a permutation of the labels."""
    moved = [tuple(sorted((sigma[a], sigma[b]))) for a, b in pairs]
    return tuple(sorted(moved))
