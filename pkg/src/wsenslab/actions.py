"""Concrete measurable systems acted on by lattice semigroups.

State spaces are capped-precision by construction.  Circle coordinates live
on the dyadic grid k / 2^L and symbolic points are words of L bits, so every
map application is exact integer arithmetic; floating point only appears
when a distance is finally reported.  Expanding maps spend precision: one
application of x -> q*x + b costs ceil(log2 q) bits, and once fewer than 32
meaningful bits remain the operation raises PrecisionExhausted instead of
silently rounding.  Rotations (q = 1) are free.

The action of a lattice element g is always evaluated in closed form (one
affine map per coordinate, or one block shift), never by iterating the
generator maps g_1 + ... + g_d times.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatch, NotAMember, PrecisionExhausted
from .semigroup import Element, FGSemigroup

HEADROOM_BITS = 32

CIRCLE = "circle"
SHIFT = "shift"


def derive_seed(*parts) -> int:
    """Stable 64-bit sub-seed derived from arbitrary labels.

    Used to hand every sampled object its own generator so that results do
    not depend on sweep order or thread scheduling.
    """
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _round_half_up(fr: Fraction) -> int:
    return (2 * fr.numerator + fr.denominator) // (2 * fr.denominator)


# ---------------------------------------------------------------------------
# state spaces


@dataclass(frozen=True)
class CircleSpace:
    """[0,1) on the dyadic grid with 2^bits points."""

    bits: int = 256

    def __post_init__(self):
        if self.bits < 2 * HEADROOM_BITS:
            raise ValueError(f"precision budget must be >= {2 * HEADROOM_BITS} bits")

    @property
    def modulus(self) -> int:
        return 1 << self.bits

    def point(self, value) -> "CirclePoint":
        fr = Fraction(value)
        fr -= math.floor(fr)
        return CirclePoint(_round_half_up(fr * self.modulus) % self.modulus, self.bits)


@dataclass(frozen=True)
class ShiftSpace:
    """One-sided binary sequences truncated to ``bits`` symbols."""

    bits: int = 256

    def __post_init__(self):
        if self.bits < 2 * HEADROOM_BITS:
            raise ValueError(f"precision budget must be >= {2 * HEADROOM_BITS} bits")

    def point(self, symbols) -> "ShiftPoint":
        """Build a point from a 0/1 string or iterable; zero padded to L bits."""
        bits = [int(b) for b in symbols]
        if any(b not in (0, 1) for b in bits) or len(bits) > self.bits:
            raise ValueError("need at most L binary symbols")
        word = 0
        for b in bits:
            word = (word << 1) | b
        word <<= self.bits - len(bits)
        return ShiftPoint(word, self.bits, self.bits)


@dataclass(frozen=True)
class ProductSpace:
    parts: tuple

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("a product space needs at least two components")

    def point(self, values) -> "ProductPoint":
        values = tuple(values)
        if len(values) != len(self.parts):
            raise DimensionMismatch("component count mismatch")
        return ProductPoint(tuple(s.point(v) for s, v in zip(self.parts, values)))


def torus(m: int, bits: int = 256):
    """The m-torus as a product of circles (a single circle for m = 1)."""
    if m == 1:
        return CircleSpace(bits)
    return ProductSpace(tuple(CircleSpace(bits) for _ in range(m)))


def space_leaves(space) -> list:
    if isinstance(space, ProductSpace):
        out = []
        for p in space.parts:
            out.extend(space_leaves(p))
        return out
    return [space]


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class CirclePoint:
    numerator: int
    bits: int
    consumed: int = 0

    def as_float(self) -> float:
        return self.numerator / (1 << self.bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.bits)


@dataclass(frozen=True)
class ShiftPoint:
    """Big-endian word of ``length`` still-meaningful symbols.

    Symbol i is ``(word >> (length - 1 - i)) & 1``; the consumed depth is
    ``bits - length``.
    """

    word: int
    length: int
    bits: int

    def symbol(self, i: int) -> int:
        return (self.word >> (self.length - 1 - i)) & 1

    def prefix(self, k: int) -> tuple[int, ...]:
        return tuple(self.symbol(i) for i in range(min(k, self.length)))


@dataclass(frozen=True)
class ProductPoint:
    parts: tuple


def same_state(x, y) -> bool:
    """Equality of the represented state, ignoring budget counters."""
    if isinstance(x, CirclePoint) and isinstance(y, CirclePoint):
        return x.numerator == y.numerator and x.bits == y.bits
    if isinstance(x, ShiftPoint) and isinstance(y, ShiftPoint):
        m = min(x.length, y.length)
        return (x.word >> (x.length - m)) == (y.word >> (y.length - m))
    if isinstance(x, ProductPoint) and isinstance(y, ProductPoint):
        return len(x.parts) == len(y.parts) and all(
            same_state(a, b) for a, b in zip(x.parts, y.parts)
        )
    return False


# ---------------------------------------------------------------------------
# generator maps


@dataclass(frozen=True)
class CircleAffine:
    """x -> mult*x + offset (mod 1) with integer mult >= 1."""

    mult: int = 1
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        if self.mult < 1:
            raise ValueError("circle multiplier must be a positive integer")
        object.__setattr__(self, "offset", Fraction(self.offset))

    @property
    def bit_cost(self) -> int:
        """Precision consumed per application: ceil(log2 mult)."""
        return (self.mult - 1).bit_length()


@dataclass(frozen=True)
class ShiftMap:
    steps: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("shift step must be >= 1")


@dataclass(frozen=True)
class ProductMap:
    parts: tuple


def _map_leaves(gmap, space) -> list:
    if isinstance(space, ProductSpace):
        if not isinstance(gmap, ProductMap) or len(gmap.parts) != len(space.parts):
            raise DimensionMismatch("generator map does not match the product space")
        out = []
        for m, s in zip(gmap.parts, space.parts):
            out.extend(_map_leaves(m, s))
        return out
    if isinstance(space, CircleSpace):
        if not isinstance(gmap, CircleAffine):
            raise DimensionMismatch("circle coordinate needs an affine circle map")
        return [gmap]
    if isinstance(space, ShiftSpace):
        if not isinstance(gmap, ShiftMap):
            raise DimensionMismatch("shift coordinate needs a shift map")
        return [gmap]
    raise DimensionMismatch(f"unknown space component {space!r}")


def _geometric_sum_mod(q: int, n: int, mod: int) -> int:
    """(q^(n-1) + ... + q + 1) mod ``mod``, exactly, via a lifted modulus."""
    if n == 0:
        return 0
    if q == 1:
        return n % mod
    lift = mod * (q - 1)
    return ((pow(q, n, lift) - 1) // (q - 1)) % mod


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class HaarMeasure:
    """Uniform measure on the circle grid."""


@dataclass(frozen=True)
class BernoulliMeasure:
    p: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        if not 0 < self.p < 1:
            raise ValueError("Bernoulli parameter must lie in (0,1)")


@dataclass(frozen=True)
class ProductMeasure:
    parts: tuple


def default_measure(space):
    if isinstance(space, CircleSpace):
        return HaarMeasure()
    if isinstance(space, ShiftSpace):
        return BernoulliMeasure()
    return ProductMeasure(tuple(default_measure(p) for p in space.parts))


def _check_measure(measure, space):
    if isinstance(space, CircleSpace) and isinstance(measure, HaarMeasure):
        return
    if isinstance(space, ShiftSpace) and isinstance(measure, BernoulliMeasure):
        return
    if isinstance(space, ProductSpace) and isinstance(measure, ProductMeasure):
        if len(measure.parts) != len(space.parts):
            raise DimensionMismatch("measure/space component mismatch")
        for m, s in zip(measure.parts, space.parts):
            _check_measure(m, s)
        return
    raise DimensionMismatch(f"measure {measure!r} does not fit space {space!r}")


def _sample(space, measure, rng: random.Random):
    if isinstance(space, CircleSpace):
        return CirclePoint(rng.getrandbits(space.bits), space.bits)
    if isinstance(space, ShiftSpace):
        num, den = measure.p.numerator, measure.p.denominator
        word = 0
        for _ in range(space.bits):
            word = (word << 1) | (1 if rng.randrange(den) < num else 0)
        return ShiftPoint(word, space.bits, space.bits)
    return ProductPoint(
        tuple(_sample(s, m, rng) for s, m in zip(space.parts, measure.parts))
    )


def sample_point(space, measure, seed):
    """One draw from the declared measure; reproducible per seed."""
    _check_measure(measure, space)
    return _sample(space, measure, random.Random(derive_seed("point", seed)))


def sample_stream(space, measure, seed, count: int, tag: str = "stream"):
    return [
        sample_point(space, measure, derive_seed(seed, tag, i)) for i in range(count)
    ]


# ---------------------------------------------------------------------------
# the action


@dataclass(frozen=True)
class SemigroupAction:
    """A homomorphism from a lattice semigroup into endomorphisms of a space.

    One generator map per ambient coordinate of the semigroup; the maps must
    commute, which is checked in closed form at construction (exact for the
    affine and shift families used here).
    """

    semigroup: FGSemigroup
    space: object
    measure: object
    gens: tuple

    def __post_init__(self):
        if len(self.gens) != self.semigroup.dim:
            raise DimensionMismatch(
                "need exactly one generator map per semigroup coordinate"
            )
        _check_measure(self.measure, self.space)
        leaves = space_leaves(self.space)
        per_gen = [_map_leaves(g, self.space) for g in self.gens]
        # leaf_maps[j][i]: action of generator i on leaf coordinate j
        leaf_maps = [
            tuple(per_gen[i][j] for i in range(len(self.gens)))
            for j in range(len(leaves))
        ]
        object.__setattr__(self, "_leaves", tuple(leaves))
        object.__setattr__(self, "_leaf_maps", tuple(leaf_maps))
        grid_offsets = []
        for leaf, maps in zip(leaves, leaf_maps):
            if isinstance(leaf, CircleSpace):
                mod = leaf.modulus
                offs = tuple(
                    _round_half_up((m.offset - math.floor(m.offset)) * mod) % mod
                    for m in maps
                )
                grid_offsets.append(offs)
                # commutation of x->qx+b and x->q'x+b' on the grid reduces to
                # (q-1) b' == (q'-1) b  (mod 2^L)
                for i in range(len(maps)):
                    for k in range(i + 1, len(maps)):
                        lhs = (maps[i].mult - 1) * offs[k] % mod
                        rhs = (maps[k].mult - 1) * offs[i] % mod
                        if lhs != rhs:
                            raise ValueError(
                                f"generator maps {i} and {k} do not commute on a circle coordinate"
                            )
            else:
                grid_offsets.append(None)
        object.__setattr__(self, "_grid_offsets", tuple(grid_offsets))

    # -- closed forms -------------------------------------------------------

    def _closed_form(self, g: Element):
        """Per-leaf closed form of T_g.

        Circle leaf: (kind, Q mod 2^L, B mod 2^L, bit cost) with the linear
        accounting cost = sum_i g_i * ceil(log2 q_i).  Shift leaf:
        (kind, total steps).
        """
        forms = []
        for leaf, maps, offs in zip(self._leaves, self._leaf_maps, self._grid_offsets):
            if isinstance(leaf, CircleSpace):
                mod = leaf.modulus
                q_acc, b_acc, cost = 1, 0, 0
                for i, m in enumerate(maps):
                    n = g[i]
                    if n == 0:
                        continue
                    qn = pow(m.mult, n, mod)
                    bn = offs[i] * _geometric_sum_mod(m.mult, n, mod) % mod
                    # apply gen i n times after what we already have
                    q_acc, b_acc = qn * q_acc % mod, (qn * b_acc + bn) % mod
                    cost += n * m.bit_cost
                forms.append((CIRCLE, q_acc, b_acc, cost))
            else:
                steps = sum(g[i] * m.steps for i, m in enumerate(maps))
                forms.append((SHIFT, steps))
        return tuple(forms)

    def closed_form(self, g) -> tuple:
        g = tuple(g)
        if not self.semigroup.member(g):
            raise NotAMember(f"{g} is not a member of the acting semigroup")
        return self._closed_form(g)

    def closed_forms(self, elements) -> list[tuple]:
        """Closed forms for a sweep; elements are trusted members."""
        return [self._closed_form(tuple(g)) for g in elements]

    def apply_form(self, form, x):
        leaves = self._leaves
        if len(leaves) == 1:
            return self._apply_leaf(form[0], leaves[0], x)
        if not isinstance(x, ProductPoint) or len(x.parts) != len(leaves):
            raise DimensionMismatch("point does not match the action's space")
        return ProductPoint(
            tuple(
                self._apply_leaf(f, s, p) for f, s, p in zip(form, leaves, x.parts)
            )
        )

    @staticmethod
    def _apply_leaf(form, leaf, p):
        if form[0] == CIRCLE:
            _, q, b, cost = form
            if not isinstance(p, CirclePoint) or p.bits != leaf.bits:
                raise DimensionMismatch("point does not live on this circle")
            consumed = p.consumed + cost
            if consumed > p.bits - HEADROOM_BITS:
                raise PrecisionExhausted(
                    f"circle map would consume {consumed} of {p.bits} bits "
                    f"(limit {p.bits - HEADROOM_BITS}); raise the precision budget"
                )
            return CirclePoint((q * p.numerator + b) % leaf.modulus, p.bits, consumed)
        _, steps = form
        if not isinstance(p, ShiftPoint) or p.bits != leaf.bits:
            raise DimensionMismatch("point does not live on this shift space")
        length = p.length - steps
        if length < HEADROOM_BITS:
            raise PrecisionExhausted(
                f"shift by {steps} leaves {length} of {p.bits} bits; "
                "raise the precision budget"
            )
        return ShiftPoint(p.word & ((1 << length) - 1), length, p.bits)

    def apply(self, g, x):
        """T_g x, with membership and precision checks."""
        return self.apply_form(self.closed_form(g), x)

    # -- derived systems ----------------------------------------------------

    def generator_map_for(self, h):
        """Materialize T_h as a single generator map (for restrictions).

        The multiplier is the true integer product of the composed
        multipliers, so the budget accounting of the restricted system is
        the honest ceil(log2 Q) of the composite.
        """
        h = tuple(h)
        forms = self.closed_form(h)
        parts = []
        for leaf, maps, form in zip(self._leaves, self._leaf_maps, forms):
            if form[0] == CIRCLE:
                q_true = 1
                for i, m in enumerate(maps):
                    q_true *= m.mult ** h[i]
                cost = (q_true - 1).bit_length()
                if cost > leaf.bits - HEADROOM_BITS:
                    raise PrecisionExhausted(
                        f"T_{h} already exceeds the precision budget as a generator"
                    )
                parts.append(
                    CircleAffine(q_true, Fraction(form[2], leaf.modulus))
                )
            else:
                parts.append(ShiftMap(form[1]))
        if len(parts) == 1:
            return parts[0]
        return _rebuild_product_map(self.space, parts)


def _rebuild_product_map(space, leaf_parts: list):
    """Reassemble per-leaf maps into the tree shape of ``space``."""
    if isinstance(space, ProductSpace):
        out = []
        for part in space.parts:
            take = len(space_leaves(part))
            out.append(_rebuild_product_map(part, leaf_parts[:take]))
            del leaf_parts[:take]
        return ProductMap(tuple(out))
    return leaf_parts.pop(0)


def factor_project(action: SemigroupAction, index: int) -> SemigroupAction:
    """The component system of a product action at the given coordinate.

    The projection intertwines the actions by construction and pushes the
    product measure to its component.
    """
    if not isinstance(action.space, ProductSpace):
        raise DimensionMismatch("factor projection needs a product space")
    if not isinstance(action.measure, ProductMeasure):
        raise DimensionMismatch("factor projection needs a product measure")
    space = action.space.parts[index]
    measure = action.measure.parts[index]
    gens = tuple(g.parts[index] for g in action.gens)
    return SemigroupAction(action.semigroup, space, measure, gens)


def project_point(x: ProductPoint, index: int):
    return x.parts[index]


# ---------------------------------------------------------------------------
# dynamical probes


def orbit_tail_density(
    action, metric, x, g, n: int, eps: float, grid: int = 64
) -> float:
    """Fraction of a fixed reference grid within eps of the order-tail orbit
    {T_h x : h >= g, h in Box(n)}.  Values near 1 are transitivity evidence
    at resolution eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    tail = action.semigroup.tail_in_box(g, n)
    forms = action.closed_forms(tail)
    orbit = [action.apply_form(f, x) for f in forms]
    ref = reference_grid(action.space, grid)
    hit = 0
    for p in ref:
        if any(metric.dist(p, q) <= eps for q in orbit):
            hit += 1
    return hit / len(ref)


def reference_grid(space, grid: int = 64) -> list:
    if isinstance(space, CircleSpace):
        mod = space.modulus
        return [CirclePoint(i * mod // grid, space.bits) for i in range(grid)]
    if isinstance(space, ShiftSpace):
        depth = max(1, (grid - 1).bit_length())
        pad = space.bits - depth
        return [
            ShiftPoint(w << pad, space.bits, space.bits) for w in range(1 << depth)
        ]
    per = max(2, round(grid ** (1.0 / len(space.parts))))
    grids = [reference_grid(p, per) for p in space.parts]
    out = []
    for combo in _product_lists(grids):
        out.append(ProductPoint(tuple(combo)))
    return out


def _product_lists(lists):
    if not lists:
        yield []
        return
    for head in lists[0]:
        for rest in _product_lists(lists[1:]):
            yield [head] + rest


def uniform_rigidity_probe(
    action, metric, schedule, sample_count: int = 32, seed: int = 0
) -> list[float]:
    """Sup displacement max_x d(T_h x, x) over sampled x, one value per
    schedule element.  A sequence tending to 0 is rigidity evidence."""
    samples = sample_stream(action.space, action.measure, seed, sample_count, "rigid")
    out = []
    for h in schedule:
        form = action.closed_form(h)
        out.append(
            max(metric.dist(action.apply_form(form, p), p) for p in samples)
        )
    return out


def cell_index(point, cells_per_leaf: int) -> int:
    """Coarse partition cell of a point (used by the nonsingularity proxy)."""
    if isinstance(point, CirclePoint):
        return (point.numerator * cells_per_leaf) >> point.bits
    if isinstance(point, ShiftPoint):
        depth = (cells_per_leaf - 1).bit_length()
        return point.word >> (point.length - depth)
    idx = 0
    for p in point.parts:
        idx = idx * cells_per_leaf + cell_index(p, cells_per_leaf)
    return idx


def pushforward_deviation(
    action, g, cells: int = 64, samples: int = 10_000, seed: int = 0
) -> float:
    """Nonsingularity proxy: push sampled points through T_g and compare the
    occupancy of a coarse partition against direct sampling.  Returns the
    largest per-cell z-score; measure-preserving examples stay within a few
    Monte-Carlo deviations."""
    leaves = space_leaves(action.space)
    per_leaf = max(2, round(cells ** (1.0 / len(leaves))))
    direct = sample_stream(action.space, action.measure, seed, samples, "direct")
    pushed = sample_stream(action.space, action.measure, seed + 1, samples, "push")
    form = action.closed_form(g)
    counts_d: dict[int, int] = {}
    counts_p: dict[int, int] = {}
    for p in direct:
        c = cell_index(p, per_leaf)
        counts_d[c] = counts_d.get(c, 0) + 1
    for p in pushed:
        c = cell_index(action.apply_form(form, p), per_leaf)
        counts_p[c] = counts_p.get(c, 0) + 1
    worst = 0.0
    for c in set(counts_d) | set(counts_p):
        a, b = counts_d.get(c, 0), counts_p.get(c, 0)
        z = abs(a - b) / math.sqrt(a + b) if a + b else 0.0
        worst = max(worst, z)
    return worst
