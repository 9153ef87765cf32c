"""Variation calculus on finite chains.

Arithmetic is plain float arithmetic on the stored values.  Inputs quantized
with :func:`quantize` (dyadic grid, bounded magnitude) keep every partial sum
exact, which is what makes Jordan reconstruction bitwise exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import IndexOutOfRange, InvalidInput, NegativeRadius
from .order import Chain, FiniteMetricSpace

#: Grid step used by :func:`quantize`.
QUANTUM_BITS = 30


def quantize(x: float, bits: int = QUANTUM_BITS, mode: str = "nearest") -> float:
    """Round ``x`` onto the dyadic grid ``2**-bits``."""
    scale = float(1 << bits)
    y = x * scale
    if mode == "nearest":
        y = round(y)
    elif mode == "floor":
        y = math.floor(y)
    elif mode == "trunc":
        y = math.trunc(y)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return y / scale


@dataclass(frozen=True)
class ChainFunction:
    chain: Chain
    values: tuple
    range: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        c, d = (float(v) for v in self.range)
        if len(values) != self.chain.size:
            raise InvalidInput(f"{len(values)} values for a chain of size {self.chain.size}")
        if not c <= d:
            raise InvalidInput(f"range [{c}, {d}] has c > d")
        for i, v in enumerate(values):
            if not c <= v <= d:
                raise InvalidInput(f"value {v} at point {i} lies outside [{c}, {d}]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "range", (c, d))

    @classmethod
    def tight(cls, chain: Chain, values: Sequence[float]) -> "ChainFunction":
        """Function whose declared range is exactly ``[min, max]`` of its values."""
        values = tuple(float(v) for v in values)
        return cls(chain, values, (min(values), max(values)))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def is_increasing(self) -> bool:
        return first_descent(self.values) is None


@dataclass(frozen=True)
class FunctionFamily:
    chain: Chain
    members: tuple
    range: tuple

    def __post_init__(self):
        c, d = (float(v) for v in self.range)
        if not c <= d:
            raise InvalidInput(f"range [{c}, {d}] has c > d")
        members = tuple(self.members)
        for n, f in enumerate(members):
            if f.chain != self.chain:
                raise InvalidInput(f"member {n} lives on a different chain")
            # Members may declare their own range; only the values must fit.
            if min(f.values) < c or max(f.values) > d:
                raise InvalidInput(f"member {n} leaves the common range [{c}, {d}]")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "range", (c, d))

    @classmethod
    def from_values(cls, chain: Chain, rows, range=None) -> "FunctionFamily":
        rows = [tuple(float(v) for v in row) for row in rows]
        if range is None:
            flat = [v for row in rows for v in row]
            range = (min(flat), max(flat)) if flat else (0.0, 1.0)
        return cls(chain, tuple(ChainFunction(chain, row, range) for row in rows), range)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    def rows(self) -> list:
        return [f.values for f in self.members]

    def subfamily(self, indices) -> "FunctionFamily":
        return FunctionFamily(self.chain, tuple(self.members[i] for i in indices), self.range)

    def scaled(self, alpha: float) -> "FunctionFamily":
        c, d = self.range
        lo, hi = sorted((alpha * c, alpha * d))
        return FunctionFamily.from_values(self.chain, [[alpha * v for v in f.values] for f in self], (lo, hi))


@dataclass(frozen=True)
class MetricChainFunction:
    chain: Chain
    target: FiniteMetricSpace
    values: tuple

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if len(values) != self.chain.size:
            raise InvalidInput(f"{len(values)} values for a chain of size {self.chain.size}")
        for i, v in enumerate(values):
            if not 0 <= v < self.target.size:
                raise InvalidInput(f"value {v} at point {i} is not a target point")
        object.__setattr__(self, "values", values)


def first_descent(values):
    """First adjacent pair ``(i, i+1)`` where the values drop, or None."""
    for i in range(len(values) - 1):
        if values[i + 1] < values[i]:
            return i, i + 1
    return None


def _values(f):
    return f.values if isinstance(f, ChainFunction) else tuple(f)


def variation(f: ChainFunction) -> float:
    """Sum of jumps over consecutive chain points.

    On a finite chain the consecutive sum dominates the jump sum of any
    subchain (triangle inequality), so this is the supremum.
    """
    v = _values(f)
    return sum(abs(v[i + 1] - v[i]) for i in range(len(v) - 1))


def restricted_variation(f: ChainFunction, cutoff: int) -> float:
    """Variation of ``f`` on the points ``0..cutoff`` (cutoff included)."""
    v = _values(f)
    if not 0 <= cutoff < len(v):
        raise IndexOutOfRange(f"cutoff {cutoff} outside 0..{len(v) - 1}")
    return variation(v[: cutoff + 1])


def cumulative_variation(values) -> list:
    """``[restricted_variation(f, x) for x in points]`` in one pass."""
    out = [0.0]
    for i in range(len(values) - 1):
        out.append(out[-1] + abs(values[i + 1] - values[i]))
    return out


def jordan_decompose(f: ChainFunction) -> tuple:
    """Split ``f`` into increasing ``u, v`` with ``u - v == f``.

    ``u(x)`` is the variation of ``f`` up to ``x`` and ``v = u - f``.
    """
    u = cumulative_variation(f.values)
    v = [ux - fx for ux, fx in zip(u, f.values)]
    return ChainFunction.tight(f.chain, u), ChainFunction.tight(f.chain, v)


def metric_variation(f: MetricChainFunction) -> float:
    d = f.target.dist
    v = f.values
    return sum(d[v[i + 1]][v[i]] for i in range(len(v) - 1))


def lipschitz_separators(m: FiniteMetricSpace) -> FunctionFamily:
    """Distance-to-point functions ``h_y(x) = d(y, x) / diameter``, one per point ``y``.

    Lives on ``Chain(m.size)`` used as an index carrier for the metric points.
    """
    ground = Chain(m.size)
    diam = m.diameter
    if diam == 0:
        rows = [[0.0] * m.size for _ in range(m.size)]
    else:
        rows = [[m.d(y, x) / diam for x in range(m.size)] for y in range(m.size)]
    return FunctionFamily.from_values(ground, rows, (0.0, 1.0))


def compose(h: ChainFunction, f: MetricChainFunction) -> ChainFunction:
    """``h o f`` where ``h`` is defined on the target points of ``f``."""
    return ChainFunction(f.chain, tuple(h.values[y] for y in f.values), h.range)


def is_bv_r(f: Union[ChainFunction, MetricChainFunction], r: float) -> bool:
    if r < 0:
        raise NegativeRadius(f"radius must be non-negative, got {r}")
    if isinstance(f, MetricChainFunction):
        return metric_variation(f) <= r
    return variation(f) <= r
