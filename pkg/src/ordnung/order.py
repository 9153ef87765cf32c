"""Finite ordered structures and order-topological primitives.

Points of every structure here are addressed by integer index.  Subsets of a
ground set are handled internally as bitmasks (bit ``i`` set means point ``i``
is a member) and exposed as frozensets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .errors import InvalidInput, NotStrictlyOrdered, SizeMismatch


def mask_of(points: Iterable[int]) -> int:
    m = 0
    for p in points:
        m |= 1 << p
    return m


def members(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class Chain:
    """A finite linear order on ``0..size-1`` (the rank order)."""

    size: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise InvalidInput(f"chain size must be a positive integer, got {self.size!r}")
        if self.labels is not None:
            labels = tuple(str(l) for l in self.labels)
            if len(labels) != self.size or len(set(labels)) != self.size:
                raise InvalidInput("labels must be exactly `size` distinct strings")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.size

    def points(self) -> range:
        return range(self.size)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def ray_above(self, a: int) -> frozenset:
        """The open ray ``(a, ->)``; ``a`` itself is excluded."""
        return frozenset(range(a + 1, self.size))

    def ray_below(self, b: int) -> frozenset:
        """The open ray ``(<-, b)``; ``b`` itself is excluded."""
        return frozenset(range(0, b))

    def as_poset(self) -> "FinitePoset":
        return FinitePoset.chain(self.size)


@dataclass(frozen=True)
class FinitePoset:
    """A partial order given as the full set of pairs ``(i, j)`` with ``i <= j``."""

    size: int
    relation: frozenset

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise InvalidInput("poset size must be a positive integer")
        rel = frozenset((int(i), int(j)) for i, j in self.relation)
        object.__setattr__(self, "relation", rel)
        problem = poset_violation(self.size, rel)
        if problem is not None:
            raise InvalidInput(problem)

    @classmethod
    def chain(cls, n: int) -> "FinitePoset":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i, n)))

    @classmethod
    def antichain(cls, n: int) -> "FinitePoset":
        return cls(n, frozenset((i, i) for i in range(n)))

    @classmethod
    def from_covers(cls, n: int, covers: Iterable[tuple]) -> "FinitePoset":
        """Reflexive-transitive closure of the given cover pairs."""
        reach = [{i} for i in range(n)]
        for i, j in covers:
            reach[i].add(j)
        changed = True
        while changed:
            changed = False
            for i in range(n):
                new = set().union(*(reach[j] for j in reach[i]))
                if new != reach[i]:
                    reach[i] = new
                    changed = True
        return cls(n, frozenset((i, j) for i in range(n) for j in reach[i]))

    def le(self, i: int, j: int) -> bool:
        return (i, j) in self.relation

    def up_set(self, x: int) -> frozenset:
        return frozenset(j for j in range(self.size) if (x, j) in self.relation)


def poset_violation(size: int, relation: frozenset) -> Optional[str]:
    """Describe the first partial-order axiom the relation breaks, or None."""
    for i, j in relation:
        if not (0 <= i < size and 0 <= j < size):
            return f"pair {(i, j)} is outside 0..{size - 1}"
    for i in range(size):
        if (i, i) not in relation:
            return f"not reflexive at {i}"
    for i, j in relation:
        if i != j and (j, i) in relation:
            return f"not antisymmetric: {(i, j)} and {(j, i)}"
    for i, j in relation:
        for k in range(size):
            if (j, k) in relation and (i, k) not in relation:
                return f"not transitive: {(i, j)}, {(j, k)} but not {(i, k)}"
    return None


@dataclass(frozen=True)
class FiniteTopology:
    ground_size: int
    opens: frozenset

    def __post_init__(self):
        if not isinstance(self.ground_size, int) or self.ground_size < 1:
            raise InvalidInput("ground size must be a positive integer")
        opens = frozenset(frozenset(int(p) for p in o) for o in self.opens)
        for o in opens:
            if any(not 0 <= p < self.ground_size for p in o):
                raise InvalidInput(f"open set {sorted(o)} leaves the ground set")
        object.__setattr__(self, "opens", opens)

    @classmethod
    def discrete(cls, n: int) -> "FiniteTopology":
        return cls(n, frozenset(members(m) for m in range(1 << n)))

    @classmethod
    def indiscrete(cls, n: int) -> "FiniteTopology":
        return cls(n, frozenset({frozenset(), frozenset(range(n))}))

    @classmethod
    def generated_by(cls, n: int, subbase: Iterable[Iterable[int]]) -> "FiniteTopology":
        """Coarsest topology on ``n`` points containing every set of ``subbase``."""
        return cls._from_masks(n, saturate(n, [mask_of(s) for s in subbase]))

    @classmethod
    def _from_masks(cls, n, masks):
        return cls(n, frozenset(members(m) for m in masks))

    @cached_property
    def masks(self) -> tuple:
        return tuple(sorted(mask_of(o) for o in self.opens))

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.ground_size) - 1

    @cached_property
    def minimal_neighborhoods(self) -> tuple:
        """Bitmask of the smallest open set containing each point.

        Only meaningful for a valid topology (finite spaces are Alexandrov).
        """
        out = []
        for x in range(self.ground_size):
            nb = self.full_mask
            for m in self.masks:
                if m >> x & 1:
                    nb &= m
            out.append(nb)
        return tuple(out)

    def is_open(self, points: Iterable[int]) -> bool:
        return frozenset(points) in self.opens


def saturate(n: int, masks: Iterable[int]) -> list:
    """All unions of finite intersections of ``masks`` plus the empty and full set.

    Uses the minimal-neighbourhood description of a finite topology: a set is
    open iff it contains the minimal neighbourhood of each of its points.
    """
    full = (1 << n) - 1
    masks = list(masks)
    nbhd = []
    for x in range(n):
        nb = full
        for m in masks:
            if m >> x & 1:
                nb &= m
        nbhd.append(nb)
    out = []
    for s in range(1 << n):
        t = s
        ok = True
        i = 0
        while t:
            if t & 1 and nbhd[i] & ~s:
                ok = False
                break
            t >>= 1
            i += 1
        if ok:
            out.append(s)
    return out


@dataclass(frozen=True)
class FiniteMetricSpace:
    size: int
    dist: tuple

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise InvalidInput("metric space size must be a positive integer")
        d = tuple(tuple(float(v) for v in row) for row in self.dist)
        object.__setattr__(self, "dist", d)
        problem = metric_violation(self.size, d)
        if problem is not None:
            raise InvalidInput(problem)

    @classmethod
    def path(cls, n: int) -> "FiniteMetricSpace":
        return cls(n, tuple(tuple(float(abs(i - j)) for j in range(n)) for i in range(n)))

    @classmethod
    def from_points(cls, xs: Iterable[float]) -> "FiniteMetricSpace":
        xs = list(xs)
        return cls(len(xs), tuple(tuple(abs(a - b) for b in xs) for a in xs))

    def d(self, i: int, j: int) -> float:
        return self.dist[i][j]

    @cached_property
    def diameter(self) -> float:
        return max(max(row) for row in self.dist)

    @cached_property
    def min_positive_distance(self) -> float:
        pos = [v for row in self.dist for v in row if v > 0]
        return min(pos) if pos else 0.0


def metric_violation(size, d) -> Optional[str]:
    if len(d) != size or any(len(row) != size for row in d):
        return f"distance matrix must be {size}x{size}"
    for i in range(size):
        for j in range(size):
            if d[i][j] < 0:
                return f"negative distance d({i},{j})"
            if d[i][j] != d[j][i]:
                return f"asymmetric distance at ({i},{j})"
            if (d[i][j] == 0) != (i == j):
                return f"d({i},{j})={d[i][j]} violates identity of indiscernibles"
    for i, j, k in itertools.product(range(size), repeat=3):
        if d[i][k] > d[i][j] + d[j][k]:
            return f"triangle inequality fails for ({i},{j},{k})"
    return None


@dataclass(frozen=True)
class TopologyReport:
    ok: bool
    axiom: Optional[str] = None
    offending: tuple = field(default=())

    def __bool__(self):
        return self.ok


def validate_topology(t: FiniteTopology) -> TopologyReport:
    masks = set(t.masks)
    if 0 not in masks:
        return TopologyReport(False, "missing empty set")
    if t.full_mask not in masks:
        return TopologyReport(False, "missing full set")
    # Cheap exact test first; the pairwise scan only runs to name the culprit.
    if set(saturate(t.ground_size, masks)) == masks:
        return TopologyReport(True)
    ordered = sorted(masks)
    for m1, m2 in itertools.combinations(ordered, 2):
        if m1 | m2 not in masks:
            return TopologyReport(False, "union", (members(m1), members(m2)))
        if m1 & m2 not in masks:
            return TopologyReport(False, "intersection", (members(m1), members(m2)))
    raise AssertionError("unreachable: saturation differs but pairs are closed")


def interval_topology(x: Chain) -> FiniteTopology:
    rays = [x.ray_above(a) for a in x.points()] + [x.ray_below(b) for b in x.points()]
    return FiniteTopology.generated_by(x.size, rays)


def order_separate(x: Chain, u1: int, u2: int) -> tuple:
    """Disjoint open neighbourhoods ``O1 < O2`` of ``u1 < u2``.

    If nothing lies strictly between the points the rays ``(<-, u2)`` and
    ``(u1, ->)`` are returned; otherwise the least in-between point ``t``
    splits the chain into ``(<-, t)`` and ``(t, ->)``.
    """
    if not (0 <= u1 < x.size and 0 <= u2 < x.size):
        raise InvalidInput(f"points {u1}, {u2} are not in a chain of size {x.size}")
    if u1 >= u2:
        raise NotStrictlyOrdered(f"need u1 < u2, got {u1} >= {u2}")
    if u2 == u1 + 1:
        return x.ray_below(u2), x.ray_above(u1)
    t = u1 + 1
    return x.ray_below(t), x.ray_above(t)


def is_closed_order(p: FinitePoset, t: FiniteTopology) -> bool:
    """True iff the graph of ``p`` is closed in the square of ``t``.

    In a finite product the smallest open box around ``(i, j)`` is
    ``U_i x U_j``; the complement of the graph is open exactly when every such
    box around a non-related pair misses the graph.
    """
    if p.size != t.ground_size:
        raise SizeMismatch(f"poset has {p.size} points, topology {t.ground_size}")
    nb = t.minimal_neighborhoods
    for i in range(p.size):
        for j in range(p.size):
            if (i, j) in p.relation:
                continue
            ui, uj = members(nb[i]), members(nb[j])
            if any((a, b) in p.relation for a in ui for b in uj):
                return False
    return True


def separating_family(p: FinitePoset):
    """Indicators of the principal up-sets ``{y : x <= y}``, one per point ``x``.

    The returned family lives on ``Chain(p.size)`` used purely as an index
    carrier for the poset's points; its rank order carries no meaning here.
    """
    from .variation import ChainFunction, FunctionFamily

    ground = Chain(p.size)
    members_ = []
    for x in range(p.size):
        up = p.up_set(x)
        members_.append(ChainFunction(ground, tuple(1.0 if y in up else 0.0 for y in range(p.size)), (0.0, 1.0)))
    return FunctionFamily(ground, tuple(members_), (0.0, 1.0))


@dataclass(frozen=True)
class PosetChainMap:
    """A map from a chain into a finite poset, stored as one target index per point."""

    chain: Chain
    target: FinitePoset
    values: tuple

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if len(values) != self.chain.size:
            raise InvalidInput(f"{len(values)} values for a chain of size {self.chain.size}")
        if any(not 0 <= v < self.target.size for v in values):
            raise InvalidInput("map value outside the target poset")
        object.__setattr__(self, "values", values)

    def first_violation(self):
        """First adjacent pair where the map fails to be increasing, or None."""
        v = self.values
        for i in range(len(v) - 1):
            if not self.target.le(v[i], v[i + 1]):
                return i, i + 1
        return None
