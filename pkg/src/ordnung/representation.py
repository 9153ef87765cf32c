"""Diagonal order embeddings and the finite fragmentability oracle."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import GroundTooLarge, InvalidInput, NotFragmented, NotMonotone, NotSeparating
from .order import Chain, FiniteMetricSpace, FiniteTopology, members
from .variation import ChainFunction, FunctionFamily, first_descent

DEFAULT_MAX_GROUND = 15


def max_ground() -> int:
    return int(os.environ.get("ORDNUNG_MAX_GROUND", DEFAULT_MAX_GROUND))


# ---------------------------------------------------------------------------
# diagonal embedding


def unseparated_pairs(x: Chain, family: FunctionFamily) -> list:
    rows = family.rows()
    vec = [tuple(r[p] for r in rows) for p in x.points()]
    return [(p, q) for p, q in itertools.combinations(x.points(), 2) if vec[p] == vec[q]]


def _indicator(x: Chain, b: int, c: float, d: float) -> ChainFunction:
    return ChainFunction(x, tuple(d if p >= b else c for p in x.points()), (c, d))


def augment_separating(x: Chain, family: FunctionFamily) -> FunctionFamily:
    """Append up-ray indicators ``{p : b <= p}`` until the family separates points.

    Adjacent unseparated pairs are handled first, in ascending order of their
    upper point ``b``; any pair still unseparated afterwards (only possible
    for non-monotone members) gets the indicator of its upper point.
    Indicators take the values ``c`` and ``d`` of the family range; a
    degenerate range ``c == d`` is widened to ``[c, c + 1]``.
    """
    if not unseparated_pairs(x, family):
        return family
    c, d = family.range
    if c == d:
        d = c + 1.0
    added = []
    fam = FunctionFamily(x, family.members, (c, d))
    for p, q in unseparated_pairs(x, fam):
        if q == p + 1:
            added.append(q)
    fam = FunctionFamily(x, fam.members + tuple(_indicator(x, b, c, d) for b in added), (c, d))
    while True:
        left = unseparated_pairs(x, fam)
        if not left:
            return fam
        fam = FunctionFamily(x, fam.members + (_indicator(x, left[0][1], c, d),), (c, d))


def product_order(vectors: Sequence[tuple]) -> frozenset:
    """Pairs ``(p, q)`` with ``vectors[p] <= vectors[q]`` in every coordinate."""
    return frozenset(
        (p, q)
        for p, u in enumerate(vectors)
        for q, v in enumerate(vectors)
        if all(a <= b for a, b in zip(u, v))
    )


@dataclass(frozen=True)
class EmbeddingResult:
    source: Chain
    family: FunctionFamily
    image_points: tuple
    induced_relation: frozenset
    extensions: tuple

    @classmethod
    def build(cls, x: Chain, family: FunctionFamily) -> "EmbeddingResult":
        """Diagonal map, product order and coordinate projections, unchecked."""
        rows = family.rows()
        image = tuple(tuple(r[p] for r in rows) for p in x.points())
        ext = tuple(tuple(v[i] for v in image) for i in range(len(rows)))
        return cls(x, family, image, product_order(image), ext)


def diagonal_embed(x: Chain, family: FunctionFamily, auto_augment: bool = False) -> EmbeddingResult:
    for n, f in enumerate(family):
        bad = first_descent(f.values)
        if bad is not None:
            raise NotMonotone(f"member {n} decreases between points {bad}", member=n, points=bad)
    if auto_augment:
        family = augment_separating(x, family)
    pairs = unseparated_pairs(x, family)
    if pairs:
        raise NotSeparating(f"points {pairs[0]} share every coordinate", pair=pairs[0])
    return EmbeddingResult.build(x, family)


@dataclass
class ClaimReport:
    closed_partial_order: bool = True
    linear: bool = True
    extensions_ok: bool = True
    topologies_agree: bool = True
    degenerate: bool = True
    counterexamples: dict = field(default_factory=dict)
    notes: tuple = (
        "closedness of the product order is automatic on a finite image",
        "the image equals its closure, so density is not testable",
        "both topologies on a finite image are discrete",
    )

    def substantive_pass(self) -> bool:
        return self.closed_partial_order and self.linear and self.extensions_ok


def verify_claims(e: EmbeddingResult) -> ClaimReport:
    rep = ClaimReport()
    rel = e.induced_relation
    pts = range(len(e.image_points))

    for p in pts:
        if (p, p) not in rel:
            rep.closed_partial_order = False
            rep.counterexamples.setdefault("claim1", ("reflexivity", p))
    for p, q in rel:
        if p != q and (q, p) in rel:
            rep.closed_partial_order = False
            rep.counterexamples.setdefault("claim1", ("antisymmetry", (p, q), (q, p)))
    for (p, q), r in itertools.product(rel, pts):
        if (q, r) in rel and (p, r) not in rel:
            rep.closed_partial_order = False
            rep.counterexamples.setdefault("claim1", ("transitivity", (p, q), (q, r)))
            break

    for p, q in itertools.combinations(pts, 2):
        if (p, q) not in rel and (q, p) not in rel:
            rep.linear = False
            rep.counterexamples.setdefault("claim2", ("incomparable", p, q))
        # Order fidelity: the source order p < q must be reproduced.
        if p < e.source.size and q < e.source.size and (p, q) not in rel:
            rep.linear = False
            rep.counterexamples.setdefault("claim2", ("order not induced", p, q))

    for i, ext in enumerate(e.extensions):
        for p, q in rel:
            if ext[p] > ext[q]:
                rep.extensions_ok = False
                rep.counterexamples.setdefault("claim3", ("not increasing", i, (p, q)))
        f = e.family[i].values if i < len(e.family) else ()
        for p in range(e.source.size):
            if p >= len(ext) or p >= len(f) or ext[p] != f[p]:
                rep.extensions_ok = False
                rep.counterexamples.setdefault("claim3", ("does not extend", i, p))
                break
    return rep


# ---------------------------------------------------------------------------
# fragmentability


@dataclass(frozen=True)
class FragmentationResult:
    fragmented: bool
    witness: Optional[frozenset] = None

    def __bool__(self):
        return self.fragmented


def _subset_diameters(values, target: Optional[FiniteMetricSpace], n: int) -> list:
    """Diameter of the image of every subset mask, by adding the lowest point."""
    diam = [0.0] * (1 << n)
    if target is None:
        lo = [0.0] * (1 << n)
        hi = [0.0] * (1 << n)
        for s in range(1, 1 << n):
            low = (s & -s).bit_length() - 1
            rest = s & (s - 1)
            v = values[low]
            if rest:
                lo[s] = min(lo[rest], v)
                hi[s] = max(hi[rest], v)
            else:
                lo[s] = hi[s] = v
            diam[s] = hi[s] - lo[s]
        return diam
    for s in range(1, 1 << n):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        y = values[low]
        far = 0.0
        r, i = rest, 0
        while r:
            if r & 1:
                far = max(far, target.d(y, values[i]))
            r >>= 1
            i += 1
        diam[s] = max(diam[rest], far)
    return diam


def _check_ground(t: FiniteTopology, values):
    if len(values) != t.ground_size:
        raise InvalidInput(f"{len(values)} values for a ground set of size {t.ground_size}")
    cap = max_ground()
    if t.ground_size > cap:
        raise GroundTooLarge(f"ground size {t.ground_size} exceeds the exhaustive bound {cap}")


def is_fragmented(values, t: FiniteTopology, epsilon: float,
                  target: Optional[FiniteMetricSpace] = None) -> FragmentationResult:
    """Exhaustive check over every nonempty subset ``A`` of the ground set.

    ``A`` is fine when some open ``O`` meets it with ``f(O & A)`` of diameter
    at most ``epsilon``.  Shrinking ``O`` only shrinks the image, so it is
    enough to try the minimal open neighbourhood of each point of ``A``.
    The failing ``A`` reported is the first one in bitmask order.
    """
    if not epsilon > 0:
        raise InvalidInput(f"epsilon must be positive, got {epsilon}")
    values = list(values)
    _check_ground(t, values)
    n = t.ground_size
    nb = t.minimal_neighborhoods
    diam = _subset_diameters(values, target, n)
    for a in range(1, 1 << n):
        s, x, ok = a, 0, False
        while s:
            if s & 1 and diam[nb[x] & a] <= epsilon:
                ok = True
                break
            s >>= 1
            x += 1
        if not ok:
            return FragmentationResult(False, members(a))
    return FragmentationResult(True)


def _small_piece(a: int, nb, diam, epsilon) -> Optional[int]:
    s, x = a, 0
    while s:
        if s & 1 and diam[nb[x] & a] <= epsilon:
            return nb[x]
        s >>= 1
        x += 1
    return None


@dataclass(frozen=True)
class VectorClosureReport:
    holds: bool
    direct: bool
    replay: bool
    failing_subset: Optional[frozenset] = None

    def __bool__(self):
        return self.holds


def fragmented_vector_closure(f, g, t: FiniteTopology, epsilon: float) -> VectorClosureReport:
    """Check that ``f + g`` is fragmented at ``epsilon`` given both summands
    are at ``epsilon / 2``, directly and by replaying the two-step choice of
    open sets ``O1`` (for ``f``) and then ``O2`` (for ``g`` inside ``A & O1``).
    """
    f, g = list(f), list(g)
    half = epsilon / 2
    for name, h in (("f", f), ("g", g)):
        if not is_fragmented(h, t, half):
            raise NotFragmented(f"{name} is not fragmented at epsilon/2 = {half}")
    total = [a + b for a, b in zip(f, g)]
    direct = is_fragmented(total, t, epsilon)
    n = t.ground_size
    nb = t.minimal_neighborhoods
    df = _subset_diameters(f, None, n)
    dg = _subset_diameters(g, None, n)
    dt = _subset_diameters(total, None, n)
    failing = None
    for a in range(1, 1 << n):
        o1 = _small_piece(a, nb, df, half)
        a1 = a & o1
        o2 = _small_piece(a1, nb, dg, half)
        piece = a1 & o2
        if not piece or dt[piece] > epsilon:
            failing = members(a)
            break
    replay = failing is None
    return VectorClosureReport(bool(direct) and replay, bool(direct), replay,
                               failing if failing is not None else direct.witness)
