"""Generators for classical families and seeded random corpora.

Every generator is a pure function of its arguments; random ones take an
integer seed fed to :func:`numpy.random.default_rng`.  Random values are
quantized onto a dyadic grid so that downstream variation sums are exact.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import GridTooCoarse, InvalidInput, TooLarge
from .order import Chain, FiniteTopology, mask_of, members, saturate
from .variation import QUANTUM_BITS, FunctionFamily

_SCALE = float(1 << QUANTUM_BITS)


def _floor_q(x):
    return np.floor(np.asarray(x, dtype=float) * _SCALE) / _SCALE


def _trunc_q(x):
    return np.trunc(np.asarray(x, dtype=float) * _SCALE) / _SCALE


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < 2**64:
        raise InvalidInput(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return np.random.default_rng(int(seed))


def rademacher_sign(n: int, x: Fraction) -> int:
    """``sgn(sin(2**n * pi * x))`` evaluated exactly for rational ``x``.

    The sine is positive when ``floor(2**n x)`` is even and negative when it
    is odd; it vanishes when ``2**n x`` is an integer.
    """
    t = x * 2**n
    if t.denominator == 1:
        return 0
    return 1 if (t.numerator // t.denominator) % 2 == 0 else -1


def _rademacher_grid(n_max, grid):
    offsets = [Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(1, 8), Fraction(3, 8)]
    pts = []
    for j in range(grid):
        for off in offsets:
            x = (j + off) / grid
            if all(rademacher_sign(n, x) != 0 for n in range(1, n_max + 1)):
                pts.append(x)
                break
        else:
            raise GridTooCoarse(f"cell {j} of a {grid}-grid has no usable sample point")
    return pts


def gen_rademacher(n_max: int, grid: int) -> FunctionFamily:
    """``r_n = sgn(sin(2**n pi x))`` for ``n = 1..n_max`` on cell midpoints of a
    ``grid``-cell partition of ``[0, 1]``; values in ``{-1, 1}``.

    Midpoints never hit a zero when ``grid`` is a power of two; otherwise a
    point falling on a zero is nudged inside its cell.  Every sign cell of
    ``r_{n_max}`` must receive a sample.
    """
    if n_max < 1 or grid < 1:
        raise InvalidInput("n_max and grid must be positive")
    pts = _rademacher_grid(n_max, grid)
    cells = {int(x * 2**n_max) for x in pts}
    if len(cells) < 2**n_max:
        raise GridTooCoarse(f"{grid} points cannot sample all {2**n_max} sign cells of r_{n_max}")
    chain = Chain(len(pts))
    rows = [[float(rademacher_sign(n, x)) for x in pts] for n in range(1, n_max + 1)]
    return FunctionFamily.from_values(chain, rows, (-1.0, 1.0))


def rademacher_points(n_max: int, grid: int) -> list:
    return [float(x) for x in _rademacher_grid(n_max, grid)]


def gen_cantor_projections(k: int) -> FunctionFamily:
    """Coordinate projections on ``{0,1}**k`` listed in lexicographic order."""
    if not 1 <= k <= 20:
        raise TooLarge(f"k must lie in 1..20, got {k}")
    n = 1 << k
    chain = Chain(n)
    rows = [[float(p >> (k - 1 - m) & 1) for p in range(n)] for m in range(k)]
    return FunctionFamily.from_values(chain, rows, (0.0, 1.0))


def gen_helly_powers(n_max: int, grid) -> FunctionFamily:
    """``t -> t**n`` for ``n = 1..n_max`` sampled on an increasing grid in [0, 1]."""
    grid = [float(t) for t in grid]
    if any(not 0.0 <= t <= 1.0 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInput("grid must be strictly increasing inside [0, 1]")
    chain = Chain(len(grid))
    rows = [[t**n for t in grid] for n in range(1, n_max + 1)]
    return FunctionFamily.from_values(chain, rows, (0.0, 1.0))


def gen_random_monotone(count: int, chain_size: int, seed: int, c: float = 0.0, d: float = 1.0,
                        pin_endpoints: bool = False) -> FunctionFamily:
    """Sorted uniform draws in ``[c, d]``.

    With ``pin_endpoints`` the first and last values are ``c`` and ``d`` and
    interior draws are strictly increasing (samples of an increasing
    homeomorphism of the interval).
    """
    rng = _check_seed(seed)
    chain = Chain(chain_size)
    rows = []
    for _ in range(count):
        if pin_endpoints:
            while True:
                inner = np.sort(_floor_q(c + (d - c) * rng.random(max(chain_size - 2, 0))))
                row = np.concatenate([[c], inner, [d]])[:chain_size] if chain_size > 1 else np.array([c])
                if chain_size < 2 or np.all(np.diff(row) > 0):
                    break
        else:
            row = np.sort(_floor_q(c + (d - c) * rng.random(chain_size)))
        rows.append(row.tolist())
    return FunctionFamily.from_values(chain, rows, (c, d))


def gen_random_bv(count: int, chain_size: int, r: float, seed: int) -> FunctionFamily:
    """Signed random walks with total jump sum a uniform draw in ``[0, r]``.

    Values live in ``[0, r]``.  Increments are truncated onto the dyadic grid
    (never enlarging the jump sum) and the start is placed so the walk fits.
    """
    if not r > 0:
        raise InvalidInput(f"r must be positive, got {r}")
    rng = _check_seed(seed)
    chain = Chain(chain_size)
    rows = []
    for _ in range(count):
        steps = rng.uniform(-1.0, 1.0, chain_size - 1)
        target = rng.uniform(0.0, r)
        total = np.abs(steps).sum()
        steps = _trunc_q(steps * (target / total)) if total > 0 else np.zeros(chain_size - 1)
        walk = np.concatenate([[0.0], np.cumsum(steps)])
        width = walk.max() - walk.min()
        start = _floor_q(rng.uniform(0.0, 1.0) * (r - width)) - walk.min()
        rows.append((start + walk).tolist())
    return FunctionFamily.from_values(chain, rows, (0.0, float(r)))


def gen_random_topology(ground_size: int, open_count_hint: int, seed: int) -> FiniteTopology:
    """Saturation of ``open_count_hint`` distinct random subsets.

    A hint of ``2**ground_size`` or more takes every subset (discrete
    topology); a hint of 0 gives the indiscrete topology.
    """
    if not 1 <= ground_size <= 15:
        raise InvalidInput(f"ground size must lie in 1..15, got {ground_size}")
    rng = _check_seed(seed)
    total = 1 << ground_size
    hint = min(max(int(open_count_hint), 0), total)
    picks = rng.choice(total, size=hint, replace=False) if hint else []
    masks = saturate(ground_size, [int(m) for m in picks])
    return FiniteTopology(ground_size, frozenset(members(m) for m in masks))


def ray_open_topology(chain_size: int, extra_hint: int, seed: int) -> FiniteTopology:
    """Random topology on a chain in which every open ray is open."""
    rng = _check_seed(seed)
    rays = [mask_of(range(a + 1, chain_size)) for a in range(chain_size)]
    rays += [mask_of(range(0, b)) for b in range(chain_size)]
    extra = rng.integers(0, 1 << chain_size, size=extra_hint).tolist()
    masks = saturate(chain_size, rays + [int(m) for m in extra])
    return FiniteTopology(chain_size, frozenset(members(m) for m in masks))
