import itertools
import math
from fractions import Fraction

import pytest

from ordnung.errors import GridTooCoarse, TooLarge
from ordnung.gallery import (
    gen_cantor_projections,
    gen_helly_powers,
    gen_rademacher,
    gen_random_bv,
    gen_random_monotone,
    gen_random_topology,
    rademacher_points,
    rademacher_sign,
)
from ordnung.order import validate_topology
from ordnung.tameness import independence_at, independence_search, max_independent_size
from ordnung.variation import first_descent, is_bv_r, variation


def test_rademacher_sign_against_sine():
    for n in range(1, 6):
        for j in range(1, 64, 2):
            x = Fraction(j, 64) + Fraction(1, 1000)
            assert rademacher_sign(n, x) == (1 if math.sin(2**n * math.pi * float(x)) > 0 else -1)
    assert rademacher_sign(1, Fraction(1, 2)) == 0


def test_rademacher_n1_two_cells():
    assert rademacher_points(1, 2) == [0.25, 0.75]
    assert gen_rademacher(1, 2).rows() == [(1.0, -1.0)]


def test_rademacher_n2_eight_midpoints():
    r2 = gen_rademacher(2, 8).rows()[1]
    assert r2 == (1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0)


def test_rademacher_variation_at_least_two():
    fam = gen_rademacher(4, 32)
    assert all(variation(f) >= 2 for f in fam)


def test_rademacher_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        gen_rademacher(3, 4)


def test_rademacher_non_power_grid_avoids_zeros():
    fam = gen_rademacher(2, 6)
    assert all(v in (-1.0, 1.0) for row in fam.rows() for v in row)


@pytest.mark.parametrize("n", range(1, 7))
def test_rademacher_independent_at_half(n):
    fam = gen_rademacher(n, 2 ** (n + 1))
    assert independence_at(fam, range(n), -0.5, 0.5).validate(fam)


def test_cantor_small():
    assert gen_cantor_projections(1).rows() == [(0.0, 1.0)]
    assert gen_cantor_projections(2).rows() == [(0.0, 0.0, 1.0, 1.0), (0.0, 1.0, 0.0, 1.0)]


def test_cantor_lexicographic_enumeration():
    fam = gen_cantor_projections(3)
    cube = list(itertools.product((0, 1), repeat=3))
    for m, row in enumerate(fam.rows()):
        assert row == tuple(float(p[m]) for p in cube)


def test_cantor_too_large():
    with pytest.raises(TooLarge):
        gen_cantor_projections(21)


def test_cantor_max_independent():
    for k in range(1, 5):
        size, w = max_independent_size(gen_cantor_projections(k))
        assert size == k


def test_helly_powers():
    grid = [0.0, 0.3, 0.6, 1.0]
    fam = gen_helly_powers(5, grid)
    assert fam.rows()[0] == tuple(grid)
    for n, f in enumerate(fam, start=1):
        assert first_descent(f.values) is None
        assert variation(f) == pytest.approx(grid[-1] ** n - grid[0] ** n)
    assert independence_search(fam, 2) is None


def test_random_monotone():
    fam = gen_random_monotone(20, 7, 123)
    assert all(first_descent(f.values) is None for f in fam)
    assert gen_random_monotone(20, 7, 123).rows() == fam.rows()
    assert len(gen_random_monotone(0, 7, 1)) == 0


def test_random_monotone_pinned_homeomorphism_samples():
    fam = gen_random_monotone(10, 6, 4, pin_endpoints=True)
    for f in fam:
        assert f.values[0] == 0.0 and f.values[-1] == 1.0
        assert all(a < b for a, b in zip(f.values, f.values[1:]))


def test_random_bv():
    fam = gen_random_bv(50, 9, 1.5, 8)
    assert all(is_bv_r(f, 1.5) for f in fam)
    assert gen_random_bv(50, 9, 1.5, 8).rows() == fam.rows()


def test_random_bv_small_r_tame_for_wide_gaps():
    fam = gen_random_bv(8, 6, 0.01, 3)
    k, w = max_independent_size(fam)
    assert k <= 1 or w.b - w.a <= 0.01


def test_random_topology():
    assert gen_random_topology(3, 0, 1).opens == {frozenset(), frozenset({0, 1, 2})}
    assert len(gen_random_topology(3, 8, 1).opens) == 8
    for seed in range(20):
        t = gen_random_topology(5, 4, seed)
        assert validate_topology(t)
        assert gen_random_topology(5, 4, seed) == t
