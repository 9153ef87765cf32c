import itertools
import random

import pytest
from hypothesis import given, strategies as st

from ordnung.errors import IndexOutOfRange, InvalidInput, NegativeRadius
from ordnung.order import Chain, FiniteMetricSpace
from ordnung.variation import (
    ChainFunction,
    FunctionFamily,
    MetricChainFunction,
    compose,
    is_bv_r,
    jordan_decompose,
    lipschitz_separators,
    metric_variation,
    quantize,
    restricted_variation,
    variation,
)


def fn(values, rng=None):
    values = [float(v) for v in values]
    return ChainFunction(Chain(len(values)), values, rng or (min(values), max(values)))


dyadic = st.integers(-2**20, 2**20).map(lambda k: k / 2**10)
value_lists = st.lists(dyadic, min_size=1, max_size=12)


def test_variation_examples():
    assert variation(fn([0, 1, 0, 1])) == 3
    assert variation(fn([0, 0.2, 0.7, 1])) == 1
    assert variation(fn([0.3] * 5)) == 0


def test_restricted_variation_examples():
    f = fn([0, 1, 0, 1])
    assert restricted_variation(f, 2) == 2
    assert restricted_variation(f, 0) == 0
    assert restricted_variation(f, 3) == 3 == variation(f)
    with pytest.raises(IndexOutOfRange):
        restricted_variation(f, 4)


def test_jordan_hand_example():
    u, v = jordan_decompose(fn([0, 1, 0]))
    assert u.values == (0, 1, 2)
    assert v.values == (0, 0, 2)


def test_jordan_increasing_function():
    f = fn([0.25, 0.5, 0.5, 0.875])
    u, v = jordan_decompose(f)
    assert u.values == tuple(x - 0.25 for x in f.values)
    assert v.values == (-0.25,) * 4


def test_jordan_constant():
    u, v = jordan_decompose(fn([0.5, 0.5, 0.5]))
    assert u.values == (0, 0, 0)
    assert v.values == (-0.5,) * 3


@given(value_lists)
def test_jordan_reconstruction_exact(vals):
    f = fn(vals)
    u, v = jordan_decompose(f)
    assert all(a <= b for a, b in zip(u.values, u.values[1:]))
    assert all(a <= b for a, b in zip(v.values, v.values[1:]))
    assert all(a - b == x for a, b, x in zip(u.values, v.values, f.values))


@given(value_lists)
def test_monotone_variation_telescopes(vals):
    vals = sorted(vals)
    assert variation(fn(vals)) == vals[-1] - vals[0]


@given(value_lists)
def test_restriction_monotone_and_bounded(vals):
    f = fn(vals)
    rv = [restricted_variation(f, x) for x in range(len(vals))]
    assert all(a <= b for a, b in zip(rv, rv[1:]))
    assert rv[-1] <= variation(f)


def test_subchain_bound_random():
    rng = random.Random(7)
    for _ in range(500):
        n = rng.randint(1, 10)
        f = fn([rng.uniform(-1, 1) for _ in range(n)])
        k = rng.randint(1, n)
        sub = sorted(rng.sample(range(n), k))
        s = sum(abs(f.values[b] - f.values[a]) for a, b in zip(sub, sub[1:]))
        assert s <= variation(f) + 1e-12


def test_variation_is_sup_over_subchains_small():
    # Exhaustive over all subchains of a 6-point function.
    f = fn([0.1, 0.9, 0.3, 0.3, 1.0, 0.0])
    best = 0.0
    for r in range(1, 7):
        for sub in itertools.combinations(range(6), r):
            best = max(best, sum(abs(f.values[b] - f.values[a]) for a, b in zip(sub, sub[1:])))
    assert best == pytest.approx(variation(f))


def test_metric_variation_examples():
    two = FiniteMetricSpace(2, [[0, 1], [1, 0]])
    assert metric_variation(MetricChainFunction(Chain(3), two, (1, 1, 1))) == 0
    assert metric_variation(MetricChainFunction(Chain(3), two, (0, 1, 0))) == 2


@given(st.lists(st.sampled_from([0.0, 0.25, 1.0, 2.5, 4.0]), min_size=1, max_size=10))
def test_metric_variation_agrees_with_real(vals):
    pts = sorted(set(vals))
    space = FiniteMetricSpace.from_points(pts)
    m = MetricChainFunction(Chain(len(vals)), space, [pts.index(v) for v in vals])
    assert metric_variation(m) == variation(fn(vals))


def test_lipschitz_separators_two_points():
    fam = lipschitz_separators(FiniteMetricSpace(2, [[0, 1], [1, 0]]))
    assert fam.rows() == [(0.0, 1.0), (1.0, 0.0)]


def test_lipschitz_separators_one_point():
    assert lipschitz_separators(FiniteMetricSpace(1, [[0]])).rows() == [(0.0,)]


def test_lipschitz_separators_path():
    fam = lipschitz_separators(FiniteMetricSpace.path(3))
    assert fam.rows()[0] == (0.0, 0.5, 1.0)


def random_metric(rng, n):
    pts = [(rng.randrange(64) / 64, rng.randrange(64) / 64) for _ in range(n)]
    dist = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    return FiniteMetricSpace(n, dist)


def test_separator_contraction():
    rng = random.Random(3)
    for _ in range(200):
        m = random_metric(rng, rng.randint(2, 5))
        if m.diameter == 0:
            continue
        path = MetricChainFunction(Chain(6), m, [rng.randrange(m.size) for _ in range(6)])
        for h in lipschitz_separators(m):
            assert variation(compose(h, path)) <= metric_variation(path) / m.diameter + 1e-12


def test_is_bv_r():
    f = fn([0, 0.25, 0.75, 1.0], (0.0, 1.0))
    assert is_bv_r(f, 1.0 - 0.0)
    assert not is_bv_r(fn([0, 1, 0, 1]), 2.5)
    assert is_bv_r(fn([0.3, 0.3]), 0)
    with pytest.raises(NegativeRadius):
        is_bv_r(f, -1)


def test_values_must_fit_range():
    with pytest.raises(InvalidInput):
        ChainFunction(Chain(2), (0.0, 1.5), (0.0, 1.0))
    with pytest.raises(InvalidInput):
        ChainFunction(Chain(2), (0.0,), (0.0, 1.0))


def test_family_scaling_and_subfamily():
    fam = FunctionFamily.from_values(Chain(2), [[0, 1], [1, 0]], (0.0, 1.0))
    assert fam.scaled(-2.0).rows() == [(-0.0, -2.0), (-2.0, -0.0)]
    assert fam.subfamily([1]).rows() == [(1.0, 0.0)]


def test_quantize_is_idempotent():
    x = quantize(0.1)
    assert quantize(x) == x
    assert quantize(0.75) == 0.75
