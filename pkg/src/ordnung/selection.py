"""Helly-type extraction of epsilon-Cauchy subfamilies.

On finitely many sample points pointwise convergence of a subsequence is
replaced by its falsifiable shadow: every pair of selected members differs by
at most ``epsilon`` at every sample point.  All selectors work by repeated
pigeonholing into half-open bins of width ``epsilon`` and keep the most
populated bin (ties go to the lowest bin).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExhausted,
    EmptyFamily,
    InvalidInput,
    NotBVr,
    NotIncreasing,
    NotMonotone,
    TargetMismatch,
)
from .order import PosetChainMap, separating_family
from .variation import (
    FunctionFamily,
    MetricChainFunction,
    cumulative_variation,
    first_descent,
    is_bv_r,
    lipschitz_separators,
    metric_variation,
)


@dataclass(frozen=True)
class TraceStep:
    stage: str
    point: int
    bin: int
    survivors: tuple


@dataclass(frozen=True)
class SelectionResult:
    selected_indices: tuple
    epsilon: float
    sample_points: tuple
    method_trace: tuple = field(default=())

    def __len__(self):
        return len(self.selected_indices)


def bin_count(c: float, d: float, epsilon: float) -> int:
    return max(1, math.ceil((d - c) / epsilon))


def bin_of(value: float, c: float, epsilon: float, n_bins: int) -> int:
    j = math.floor((value - c) / epsilon)
    return min(max(j, 0), n_bins - 1)


def refine(rows, candidates, points, epsilon, c, d, stage="f"):
    """Pigeonhole ``candidates`` point by point; returns survivors and trace.

    ``rows[n][x]`` is the value of member ``n`` at point ``x``.
    """
    n_bins = bin_count(c, d, epsilon)
    survivors = list(candidates)
    trace = []
    for x in points:
        buckets = {}
        for n in survivors:
            buckets.setdefault(bin_of(rows[n][x], c, epsilon, n_bins), []).append(n)
        best = min(buckets, key=lambda j: (-len(buckets[j]), j))
        survivors = buckets[best]
        trace.append(TraceStep(stage, x, best, tuple(survivors)))
    return survivors, trace


def _samples(chain_size, sample_points):
    if sample_points is None:
        return tuple(range(chain_size))
    pts = tuple(int(p) for p in sample_points)
    for p in pts:
        if not 0 <= p < chain_size:
            raise InvalidInput(f"sample point {p} outside 0..{chain_size - 1}")
    return pts


def _check_epsilon(epsilon):
    if not epsilon > 0:
        raise InvalidInput(f"epsilon must be positive, got {epsilon}")


def pigeonhole_floor(n_members: int, n_bins: int, n_points: int) -> int:
    size = n_members
    for _ in range(n_points):
        size = -(-size // n_bins)
    return size


def select_monotone(family: FunctionFamily, epsilon: float, sample_points=None) -> SelectionResult:
    """Pairwise ``epsilon``-close subfamily of increasing members.

    The result has at least ``ceil(N / B**len(sample_points))`` members where
    ``B = ceil((d - c) / epsilon)``.
    """
    _check_epsilon(epsilon)
    if len(family) == 0:
        raise EmptyFamily("cannot select from an empty family")
    for n, f in enumerate(family):
        bad = first_descent(f.values)
        if bad is not None:
            raise NotMonotone(f"member {n} decreases between points {bad}", member=n, points=bad)
    points = _samples(family.chain.size, sample_points)
    c, d = family.range
    survivors, trace = refine(family.rows(), range(len(family)), points, epsilon, c, d)
    return SelectionResult(tuple(sorted(survivors)), epsilon, points, tuple(trace))


def _jordan_rows(rows):
    us, vs = [], []
    for f in rows:
        u = cumulative_variation(f)
        us.append(u)
        vs.append([a - b for a, b in zip(u, f)])
    return us, vs


def _select_bv_rows(rows, candidates, c, d, r, epsilon, points, tag=""):
    us, vs = _jordan_rows(rows)
    half = epsilon / 2
    survivors, trace_u = refine(us, candidates, points, half, 0.0, r, stage=tag + "u")
    survivors, trace_v = refine(vs, survivors, points, half, -d, r - c, stage=tag + "v")
    return survivors, trace_u + trace_v


def select_bv(family: FunctionFamily, r: float, epsilon: float, sample_points=None) -> SelectionResult:
    """Selection for members of variation at most ``r``.

    Each member is split as ``u - v`` (Jordan); the ``u`` parts are binned at
    ``epsilon / 2`` over ``[0, r]`` and the survivors' ``v`` parts at
    ``epsilon / 2`` over ``[-d, r - c]``.
    """
    _check_epsilon(epsilon)
    if len(family) == 0:
        raise EmptyFamily("cannot select from an empty family")
    for n, f in enumerate(family):
        if not is_bv_r(f, r):
            raise NotBVr(f"member {n} has variation above {r}")
    points = _samples(family.chain.size, sample_points)
    c, d = family.range
    survivors, trace = _select_bv_rows(family.rows(), range(len(family)), c, d, r, epsilon, points)
    return SelectionResult(tuple(sorted(survivors)), epsilon, points, tuple(trace))


def select_poset_valued(members: Sequence[PosetChainMap], epsilon: float, sample_points=None) -> SelectionResult:
    """Selection for increasing maps into a shared finite poset.

    Members are read through the up-set indicators of the target (0/1
    valued), so with ``epsilon < 1`` survivors agree exactly on the samples.
    """
    _check_epsilon(epsilon)
    if not members:
        raise EmptyFamily("cannot select from an empty family")
    target, chain = members[0].target, members[0].chain
    for n, m in enumerate(members):
        if m.target != target or m.chain != chain:
            raise TargetMismatch(f"member {n} has a different chain or target")
        bad = m.first_violation()
        if bad is not None:
            raise NotIncreasing(f"member {n} is not increasing at {bad}", member=n, points=bad)
    points = _samples(chain.size, sample_points)
    survivors = list(range(len(members)))
    trace = []
    for s, h in enumerate(separating_family(target)):
        rows = [[h.values[y] for y in m.values] for m in members]
        survivors, t = refine(rows, survivors, points, epsilon, 0.0, 1.0, stage=f"h{s}")
        trace.extend(t)
    return SelectionResult(tuple(sorted(survivors)), epsilon, points, tuple(trace))


def select_metric_valued(members: Sequence[MetricChainFunction], r: float, epsilon: float,
                         sample_points=None) -> SelectionResult:
    """Selection for metric-valued maps of bounded variation.

    Members are read through the rescaled distance functions of the target;
    each coordinate gets a BV selection at ``epsilon / diameter``.  Since
    ``d(y, z) = diameter * max_p |h_p(y) - h_p(z)|``, survivors lie within
    ``epsilon`` of each other in the target metric.
    """
    _check_epsilon(epsilon)
    if not members:
        raise EmptyFamily("cannot select from an empty family")
    target, chain = members[0].target, members[0].chain
    for n, m in enumerate(members):
        if m.target != target or m.chain != chain:
            raise TargetMismatch(f"member {n} has a different chain or target")
        if metric_variation(m) > r:
            raise NotBVr(f"member {n} has metric variation above {r}")
    points = _samples(chain.size, sample_points)
    survivors = list(range(len(members)))
    diam = target.diameter
    if diam == 0:
        return SelectionResult(tuple(survivors), epsilon, points, ())
    budget = epsilon / diam
    r_scaled = r / diam
    trace = []
    for p, h in enumerate(lipschitz_separators(target)):
        rows = [[h.values[y] for y in m.values] for m in members]
        survivors, t = _select_bv_rows(rows, survivors, 0.0, 1.0, r_scaled, budget, points, tag=f"h{p}.")
        trace.extend(t)
    return SelectionResult(tuple(sorted(survivors)), epsilon, points, tuple(trace))


def max_pairwise_deviation(rows, indices, points) -> float:
    """Largest ``|f_n(x) - f_m(x)|`` over selected members and sample points."""
    if not indices or not points:
        return 0.0
    block = np.asarray(rows, dtype=float)[np.ix_(list(indices), list(points))]
    return float((block.max(axis=0) - block.min(axis=0)).max())


# ---------------------------------------------------------------------------
# streaming diagonal selection


@dataclass(frozen=True)
class FunctionStream:
    """Deterministic oracle ``evaluator(n, point)`` with values in ``range``."""

    evaluator: Callable
    range: tuple


@dataclass(frozen=True)
class StreamSelection:
    stages: tuple
    diagonal: tuple
    points: tuple
    schedule: tuple
    draws: int
    trace: tuple = ()


def _as_rule(obj) -> Callable:
    if callable(obj):
        return obj
    seq = list(obj)
    return lambda m: seq[m - 1]


def diagonal_select_stream(stream: FunctionStream, points, schedule, depth: int,
                           budget: int = 100_000, lookahead: int = 4) -> StreamSelection:
    """Nested epsilon-Cauchy stages over a stream and their diagonal.

    ``points`` and ``schedule`` are 1-based rules (callables ``m -> value``)
    or sequences.  Stage ``m`` groups the previous stage's members by their
    bins of width ``eps_m`` at ``p_1..p_m`` and keeps the largest group; new
    stream members are drawn (and must match every earlier stage's group)
    until that group holds at least ``m + 1`` members and the stage has seen
    at least ``lookahead * (m + 1)`` candidates.  The lookahead keeps an
    early, finite class of leading members from crowding out the tail of the
    stream; no finite pool can certify that a class is infinite, so a bad
    choice surfaces as :class:`BudgetExhausted` at a later stage.  The ``m``-th
    diagonal member is the ``m``-th smallest index of stage ``m``, so every
    diagonal member from stage ``m`` on lies in stage ``m``.
    """
    if depth < 1:
        raise InvalidInput("depth must be at least 1")
    if lookahead < 1:
        raise InvalidInput("lookahead must be at least 1")
    point_rule, eps_rule = _as_rule(points), _as_rule(schedule)
    pts = tuple(point_rule(m) for m in range(1, depth + 1))
    eps = tuple(float(eps_rule(m)) for m in range(1, depth + 1))
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidInput("schedule must be positive and strictly decreasing")
    c, d = stream.range

    cache = {}

    def value(n, j):
        row = cache.setdefault(n, [])
        while len(row) <= j:
            row.append(float(stream.evaluator(n, pts[len(row)])))
        return row[j]

    def signature(n, m):
        e = eps[m - 1]
        nb = bin_count(c, d, e)
        return tuple(bin_of(value(n, j), c, e, nb) for j in range(m))

    chosen = []  # signature kept at each completed stage
    stage_sets = []
    trace = []
    candidates = []  # stage m-1 members, i.e. all drawn indices passing stages < m
    next_index = 0
    draws = 0
    for m in range(1, depth + 1):
        while True:
            groups = {}
            for n in candidates:
                groups.setdefault(signature(n, m), []).append(n)
            best = min(groups, key=lambda s: (-len(groups[s]), s)) if groups else None
            if (best is not None and len(groups[best]) >= m + 1
                    and len(candidates) >= lookahead * (m + 1)):
                break
            if draws >= budget:
                raise BudgetExhausted(f"draw budget {budget} exhausted at stage {m}", stage=m)
            n = next_index
            next_index += 1
            draws += 1
            if all(signature(n, j) == chosen[j - 1] for j in range(1, m)):
                candidates.append(n)
                for s in stage_sets:
                    s.append(n)
            else:
                cache.pop(n, None)
        survivors = sorted(groups[best])
        kept = set(survivors)
        for n in candidates:
            if n not in kept:
                cache.pop(n, None)
        chosen.append(best)
        stage_sets.append(list(survivors))
        trace.append((m, pts[m - 1], eps[m - 1], best, tuple(survivors)))
        candidates = survivors
    stages = tuple(tuple(s) for s in stage_sets)
    diagonal = tuple(stages[m - 1][m - 1] for m in range(1, depth + 1))
    return StreamSelection(stages, diagonal, pts, eps, draws, tuple(trace))


def check_stream_selection(sel: StreamSelection, stream: FunctionStream) -> Optional[str]:
    """Independent re-validation by direct evaluation; None when all holds."""
    for m in range(1, len(sel.stages)):
        if not set(sel.stages[m]) <= set(sel.stages[m - 1]):
            return f"stage {m + 1} is not inside stage {m}"
    if list(sel.diagonal) != sorted(set(sel.diagonal)):
        return "diagonal is not strictly increasing"
    for m in range(1, len(sel.stages) + 1):
        tail = sel.diagonal[m - 1:]
        for p in sel.points[:m]:
            vals = [stream.evaluator(n, p) for n in tail]
            if max(vals) - min(vals) > sel.schedule[m - 1]:
                return f"diagonal members beyond stage {m} spread more than eps_{m} at point {p}"
    return None
