"""Exit criteria, each at its stated size, tolerance and time limit.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
ends with one PASS/FAIL line per criterion.
"""
import itertools
import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from ordnung.cli import main
from ordnung.formats import ingest, serialize
from ordnung.gallery import (
    gen_cantor_projections,
    gen_rademacher,
    gen_random_bv,
    gen_random_monotone,
    gen_random_topology,
    ray_open_topology,
)
from ordnung.order import Chain, FiniteMetricSpace, FiniteTopology
from ordnung.representation import diagonal_embed, fragmented_vector_closure, is_fragmented, verify_claims
from ordnung.selection import (
    FunctionStream,
    check_stream_selection,
    diagonal_select_stream,
    select_bv,
    select_metric_valued,
    select_monotone,
)
from ordnung.tameness import independence_at, independence_search, l1_constant, variation_budget
from ordnung.variation import (
    FunctionFamily,
    MetricChainFunction,
    compose,
    jordan_decompose,
    lipschitz_separators,
    metric_variation,
    variation,
)

FIXTURES = Path(__file__).parent / "fixtures"


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f} s, limit {self.limit} s"


def pairwise_spread(rows, selected, points):
    return max((abs(rows[i][x] - rows[j][x]) for i, j in itertools.combinations(selected, 2) for x in points),
               default=0.0)


def cantor_witnesses():
    out = []
    for k in range(1, 7):
        fam = gen_cantor_projections(k)
        out.append((fam, independence_at(fam, range(k), 0.25, 0.75)))
    return out


def rademacher_witnesses():
    out = []
    for n in range(1, 7):
        fam = gen_rademacher(n, 128)
        out.append((fam, independence_search(fam, n)))
    return out


@pytest.mark.acceptance(1, "Cantor projections independent at (1/4, 3/4), k = 1..6")
def test_criterion_01_cantor():
    with Clock(1.0):
        for k, (fam, w) in enumerate(cantor_witnesses(), start=1):
            assert w, f"k={k}: pattern {w.empty_pattern} not realized"
            assert len(w.pattern_witnesses) == 2**k
            assert w.validate(fam)
            # every pattern point really lies strictly on the required side
            for pattern, x in w.pattern_witnesses.items():
                for i, up in zip(w.indices, pattern):
                    v = fam[i].values[x]
                    assert (v > 0.75) if up else (v < 0.25)


@pytest.mark.acceptance(2, "Rademacher family independent on a 128-midpoint grid, n = 1..6")
def test_criterion_02_rademacher():
    with Clock(5.0):
        for n, (fam, w) in enumerate(rademacher_witnesses(), start=1):
            assert w is not None, f"n={n}: no witness"
            assert w.indices == tuple(range(n))
            assert w.a < 0 < w.b
            assert w.validate(fam)


@pytest.mark.acceptance(3, "1000 monotone families are tame at k = 2")
def test_criterion_03_monotone_tameness():
    with Clock(30.0):
        for seed in range(1000):
            assert independence_search(gen_random_monotone(10, 8, seed), 2) is None, f"seed {seed}"


@pytest.mark.acceptance(4, "Jordan decomposition exact on 10 000 BV functions")
def test_criterion_04_jordan():
    with Clock(10.0):
        fam = gen_random_bv(10_000, 8, 2.0, 2024)
        for n, f in enumerate(fam):
            u, v = jordan_decompose(f)
            assert all(a <= b for a, b in zip(u.values, u.values[1:])), n
            assert all(a <= b for a, b in zip(v.values, v.values[1:])), n
            assert all(a - b == x for a, b, x in zip(u.values, v.values, f.values)), n


@pytest.mark.acceptance(5, "variation bound on every certified independent subfamily, 500 families")
def test_criterion_05_variation_bound():
    certified = 0
    with Clock(60.0):
        for seed in range(500):
            fam = gen_random_bv(6, 10, 3.0, seed)
            for k in range(1, len(fam) + 1):
                w = independence_search(fam, k)
                if w is None:
                    break
                need, have = variation_budget(w, fam)
                assert need <= have, f"seed {seed}, k={k}: {need} > {have}"
                certified += 1
    assert certified >= 500  # the bound was actually exercised


@pytest.mark.acceptance(6, "l1 constant of every certified witness >= (b - a)/2; Cantor pair = 1/2")
def test_criterion_06_l1_cross_check():
    with Clock(30.0):
        for fam, w in cantor_witnesses() + rademacher_witnesses():
            cert = l1_constant(fam.subfamily(w.indices), 1e-9)
            assert cert.constant >= (w.b - w.a) / 2 - 1e-6
        pair = gen_cantor_projections(2)
        lp = l1_constant(pair, 1e-9).constant
        # brute-force oracle: sup over the 4 cube points on a fine l1 circle
        rows = np.array(pair.rows())
        ts = np.linspace(0.0, 1.0, 4001)
        grid = np.concatenate([np.stack([ts, 1 - ts], 1), np.stack([ts, ts - 1], 1)])
        oracle = float(np.min(np.max(np.abs(grid @ rows), axis=1)))
        assert abs(lp - 0.5) <= 1e-3 and abs(oracle - 0.5) <= 1e-3
        assert abs(l1_constant(pair, 1e-3, method="grid").constant - 0.5) <= 1e-3


@pytest.mark.acceptance(7, "Helly extraction on 10 000 monotone functions, eps = 0.2")
def test_criterion_07_helly():
    with Clock(20.0):
        fam = gen_random_monotone(10_000, 3, 77)
        rows = fam.rows()
        res = select_monotone(fam, 0.2)
        assert len(res) >= 80
        assert pairwise_spread(rows, res.selected_indices, range(3)) <= 0.2
        bv = select_bv(fam, 1.0, 0.2)
        assert len(bv) >= 1
        assert pairwise_spread(rows, bv.selected_indices, range(3)) <= 0.2
        # u parts are f - f(0); the u stage is a monotone run of those at eps/2.
        shifted = FunctionFamily.from_values(fam.chain, [[x - r[0] for x in r] for r in rows], (-1.0, 1.0))
        u_run = select_monotone(shifted, 0.1)
        assert set(bv.selected_indices) <= set(u_run.selected_indices)
        u_stage = [s for s in bv.method_trace if s.stage == "u"]
        assert set(u_stage[-1].survivors) == set(u_run.selected_indices)


@pytest.mark.acceptance(8, "streaming diagonal for x^n at 1 - 1/k, eps_m = 2^-m, depth 8")
def test_criterion_08_stream():
    with Clock(10.0):
        stream = FunctionStream(lambda n, x: x ** (n + 1), (0.0, 1.0))  # index n carries f_{n+1}
        sel = diagonal_select_stream(stream, lambda k: 1 - 1 / k, lambda m: 2.0**-m, 8)
        assert check_stream_selection(sel, stream) is None
        for a, b in zip(sel.stages, sel.stages[1:]):
            assert set(b) <= set(a)
        for m in range(1, 9):
            tail = sel.diagonal[m - 1:]
            for p in sel.points[:m]:
                vals = [p ** (n + 1) for n in tail]
                assert max(vals) - min(vals) <= 2.0**-m


@pytest.mark.acceptance(9, "representation Claims 1-3 on 500 separating increasing families")
def test_criterion_09_representation():
    with Clock(30.0):
        for seed in range(500):
            fam = gen_random_monotone(3, 8, seed, pin_endpoints=True)
            e = diagonal_embed(Chain(8), fam)
            rep = verify_claims(e)
            assert rep.closed_partial_order and rep.linear and rep.extensions_ok, (seed, rep.counterexamples)
            assert rep.degenerate


@pytest.mark.acceptance(10, "fragmentability: counterexample, 500 vector pairs, 200 BV functions")
def test_criterion_10_fragmentability():
    with Clock(60.0):
        assert not is_fragmented([0.0, 1.0], FiniteTopology.indiscrete(2), 0.5)
        rng = random.Random(10)
        pairs = 0
        while pairs < 500:
            n = rng.randint(1, 6)
            t = gen_random_topology(n, rng.randint(0, 10), rng.randrange(2**32))
            f = [rng.randrange(5) / 8 for _ in range(n)]
            g = [rng.randrange(5) / 8 for _ in range(n)]
            eps = rng.choice([0.25, 0.5])
            if not (is_fragmented(f, t, eps / 2) and is_fragmented(g, t, eps / 2)):
                continue
            assert fragmented_vector_closure(f, g, t, eps)
            pairs += 1
        fam = gen_random_bv(200, 6, 2.0, 10)
        for n, f in enumerate(fam):
            t = ray_open_topology(6, 3, n)
            assert is_fragmented(f.values, t, 1e-6)


@pytest.mark.acceptance(11, "metric-valued selection on 300 paths into a 3-point space")
def test_criterion_11_metric_selection():
    with Clock(30.0):
        target = FiniteMetricSpace(3, [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]])
        rng = random.Random(11)
        members = []
        while len(members) < 300:
            vals = [rng.randrange(3)]
            for _ in range(5):
                vals.append(vals[-1] if rng.random() < 0.75 else rng.randrange(3))
            m = MetricChainFunction(Chain(6), target, vals)
            if metric_variation(m) <= 2.0:
                members.append(m)
        eps = target.min_positive_distance / 2
        res = select_metric_valued(members, 2.0, eps)
        assert res.selected_indices
        for i, j in itertools.combinations(res.selected_indices, 2):
            for x in range(6):
                assert target.d(members[i].values[x], members[j].values[x]) <= eps
        seps = lipschitz_separators(target)
        for m in members:
            for h in seps:
                assert variation(compose(h, m)) <= metric_variation(m) / target.diameter + 1e-12


@pytest.mark.acceptance(12, "CLI round-trip on every fixture and the exit-code matrix")
def test_criterion_12_cli(tmp_path, capsys):
    with Clock(10.0):
        good = sorted(p for p in FIXTURES.iterdir() if p.suffix in (".json", ".csv")
                      and not p.name.startswith(("broken", "out_of_range")))
        assert len(good) >= 8
        for p in good:
            fmt = p.suffix[1:]
            data = ingest(p)
            again = tmp_path / f"{p.stem}.again.{fmt}"
            again.write_text(serialize(data, fmt))
            assert ingest(again) == data, p.name
        f = lambda name: str(FIXTURES / name)
        matrix = [
            (["independence", f("cantor2.json"), "--k", "2"], 0),
            (["variation", f("constants.json")], 0),
            (["embed", f("constants.json"), "--auto-augment"], 0),
            (["select-monotone", f("monotone.csv"), "--epsilon", "0.25"], 0),
            (["l1const", f("cantor2.json")], 0),
            (["independence", f("monotone.csv"), "--k", "2"], 2),
            (["fragcheck", f("indiscrete.json"), "--epsilon", "0.5"], 2),
            (["dlp", f("constants.json")], 2),
            (["variation", f("broken.json")], 1),
            (["variation", f("out_of_range.json")], 1),
            (["embed", f("constants.json")], 1),
            (["select-bv", f("ramp.json"), "--epsilon", "0.1", "--r", "0.5"], 1),
        ]
        for argv, expected in matrix:
            assert main(argv) == expected, argv
            out = capsys.readouterr().out
            if expected != 1:
                assert json.loads(out)["exit_status"] == expected
