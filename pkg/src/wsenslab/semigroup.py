"""Finitely generated sub-monoids of N^d and their divisibility order.

Elements are integer vectors with nonnegative coordinates, ambient dimension
1..4.  A semigroup decides membership, enumerates its members inside a
coordinate box, and compares elements by

    g <= h   iff   h - g is again a member.

Because the monoids are pointed (no inverses) and cancellative, this relation
is a partial order.  Every supremum taken elsewhere in the package is
truncated to a box, so all arithmetic here is exact.

Four kinds are supported: the full lattice N^d, the scaled lattice kN^d,
an explicit finitely generated sub-monoid (membership by bounded dynamic
programming), and the integer points weakly between two rays in N^2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import DegenerateSemigroup, DimensionMismatch

Element = tuple[int, ...]

FULL_LATTICE = "full_lattice"
SCALED_LATTICE = "scaled_lattice"
FINITELY_GENERATED = "finitely_generated"
CONE = "cone"

KINDS = (FULL_LATTICE, SCALED_LATTICE, FINITELY_GENERATED, CONE)

MAX_DIM = 4


def zero(dim: int) -> Element:
    return (0,) * dim


def add(g: Element, h: Element) -> Element:
    """Coordinatewise sum; the semigroup operation of the ambient lattice."""
    if len(g) != len(h):
        raise DimensionMismatch(
            f"cannot add elements of dimension {len(g)} and {len(h)}"
        )
    return tuple(a + b for a, b in zip(g, h))


def scale(c: int, g: Element) -> Element:
    return tuple(c * a for a in g)


def graded_lex_key(v: Element) -> tuple[int, Element]:
    """Total order used for every deterministic enumeration: by coordinate
    sum first, ties lexicographic."""
    return (sum(v), v)


def _cross(u: Element, v: Element) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Box:
    """All vectors of N^dim with every coordinate <= bound.

    Finite, and monotone in the bound: Box(dim, n) is contained in
    Box(dim, n + 1).  Iteration order is graded lexicographic.
    """

    dim: int
    bound: int

    def __post_init__(self):
        if self.dim < 1 or self.bound < 0:
            raise ValueError("box needs dim >= 1 and bound >= 0")

    def __iter__(self):
        pts = itertools.product(range(self.bound + 1), repeat=self.dim)
        return iter(sorted(pts, key=graded_lex_key))

    def __contains__(self, v) -> bool:
        return len(v) == self.dim and all(0 <= c <= self.bound for c in v)

    def __len__(self) -> int:
        return (self.bound + 1) ** self.dim


@dataclass(frozen=True)
class FGSemigroup:
    """A pointed cancellative abelian semigroup realized inside N^dim.

    ``generators`` is the defining data: unit vectors (possibly scaled) for
    the lattice kinds, the explicit generating set for the finitely
    generated kind, and the two ray directions for the cone kind.  The member
    set of a cone is every integer point weakly between its rays, which in
    general is larger than what the rays generate.
    """

    dim: int
    kind: str
    generators: tuple[Element, ...]
    lattice_scale: int = 1
    _member_cache: dict = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"ambient dimension must be 1..{MAX_DIM}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown semigroup kind {self.kind!r}")
        if not self.generators:
            raise DegenerateSemigroup("a semigroup needs at least one generator")
        for g in self.generators:
            if len(g) != self.dim:
                raise DimensionMismatch(f"generator {g} has wrong dimension")
            if any(c < 0 for c in g):
                raise ValueError(f"generator {g} has a negative coordinate")
            if not any(g):
                raise ValueError("generators must be nonzero")
        if self.kind == SCALED_LATTICE and self.lattice_scale < 1:
            raise ValueError("lattice scale must be >= 1")
        if self.kind == CONE:
            if self.dim != 2 or len(self.generators) != 2:
                raise ValueError("a cone is spanned by two rays in N^2")
            if _cross(*self.generators) == 0:
                raise DegenerateSemigroup("cone rays must be linearly independent")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def lattice(dim: int) -> "FGSemigroup":
        """N^dim with the coordinatewise order."""
        gens = tuple(
            tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)
        )
        return FGSemigroup(dim, FULL_LATTICE, gens)

    @staticmethod
    def scaled(k: int, dim: int = 1) -> "FGSemigroup":
        """k N^dim: coordinates constrained to multiples of k."""
        gens = tuple(
            tuple(k if i == j else 0 for j in range(dim)) for i in range(dim)
        )
        return FGSemigroup(dim, SCALED_LATTICE, gens, lattice_scale=k)

    @staticmethod
    def generated(generators) -> "FGSemigroup":
        gens = tuple(tuple(g) for g in generators)
        if not gens:
            raise DegenerateSemigroup("empty generating set")
        return FGSemigroup(len(gens[0]), FINITELY_GENERATED, gens)

    @staticmethod
    def cone(ray1, ray2) -> "FGSemigroup":
        """Integer points of N^2 weakly between the two rays."""
        return FGSemigroup(2, CONE, (tuple(ray1), tuple(ray2)))

    # -- membership and order ---------------------------------------------

    def member(self, v) -> bool:
        """True iff v belongs to the member set.  Negative coordinates are
        simply non-members, never an error."""
        v = tuple(v)
        if len(v) != self.dim:
            raise DimensionMismatch(
                f"vector of dimension {len(v)} against semigroup of dimension {self.dim}"
            )
        if any(c < 0 for c in v):
            return False
        if self.kind == FULL_LATTICE:
            return True
        if self.kind == SCALED_LATTICE:
            k = self.lattice_scale
            return all(c % k == 0 for c in v)
        if self.kind == CONE:
            r1, r2 = self.generators
            s = 1 if _cross(r1, r2) > 0 else -1
            return s * _cross(r1, v) >= 0 and s * _cross(v, r2) >= 0
        return self._member_generated(v)

    def __contains__(self, v) -> bool:
        return self.member(v)

    def _member_generated(self, v: Element) -> bool:
        # Explicit-stack DFS: subtracting a nonzero generator strictly
        # decreases the coordinate sum, so the recursion is well founded.
        cache = self._member_cache
        known = cache.get(v)
        if known is not None:
            return known
        stack = [v]
        while stack:
            u = stack[-1]
            if u in cache:
                stack.pop()
                continue
            if not any(u):
                cache[u] = True
                stack.pop()
                continue
            hit = False
            pending = []
            for g in self.generators:
                w = tuple(a - b for a, b in zip(u, g))
                if any(c < 0 for c in w):
                    continue
                r = cache.get(w)
                if r is True:
                    hit = True
                    break
                if r is None:
                    pending.append(w)
            if hit:
                cache[u] = True
                stack.pop()
            elif pending:
                stack.extend(pending)
            else:
                cache[u] = False
                stack.pop()
        return cache[v]

    def leq(self, g, h) -> bool:
        """The divisibility order: g <= h iff h = g + x for a member x."""
        g, h = tuple(g), tuple(h)
        if len(g) != self.dim or len(h) != self.dim:
            raise DimensionMismatch("order comparison across dimensions")
        diff = tuple(b - a for a, b in zip(g, h))
        if any(c < 0 for c in diff):
            return False
        return self.member(diff)

    # -- enumeration -------------------------------------------------------

    def enumerate_in_box(self, n: int) -> list[Element]:
        """All members with every coordinate <= n, graded-lex ordered."""
        if n < 0:
            raise ValueError("box bound must be >= 0")
        if self.kind == FULL_LATTICE:
            pts = itertools.product(range(n + 1), repeat=self.dim)
            return sorted(pts, key=graded_lex_key)
        if self.kind == SCALED_LATTICE:
            k = self.lattice_scale
            pts = itertools.product(range(0, n + 1, k), repeat=self.dim)
            return sorted(pts, key=graded_lex_key)
        pts = itertools.product(range(n + 1), repeat=self.dim)
        return sorted((v for v in pts if self.member(v)), key=graded_lex_key)

    def tail_in_box(self, h, n: int) -> list[Element]:
        """Members g of the box with h <= g; the truncated order-tail of h."""
        h = tuple(h)
        return [g for g in self.enumerate_in_box(n) if self.leq(h, g)]

    def backward_translate(self, f, target, n: int) -> list[Element]:
        """Members g of the box with f + g in ``target``.

        ``target`` is anything supporting ``in`` for integer vectors, e.g.
        another semigroup or a sub-semigroup spec.
        """
        f = tuple(f)
        return [g for g in self.enumerate_in_box(n) if add(f, g) in target]

    def cofinal_schedule(self, depth: int) -> list[Element]:
        """An order-increasing sequence escaping to infinity.

        The default is multiples of the sum of all generators.  For every
        member h = sum a_i g_i the difference m*s - h = sum (m - a_i) g_i is
        again a member once m exceeds every coefficient, so the schedule is
        cofinal for each supported kind; the same argument applies to cones
        with real coefficients.
        """
        if depth < 1:
            raise ValueError("schedule depth must be >= 1")
        s = zero(self.dim)
        for g in self.generators:
            s = add(s, g)
        if not any(s):
            raise DegenerateSemigroup("generator sum is zero; cannot escape to infinity")
        return [scale(i, s) for i in range(1, depth + 1)]
