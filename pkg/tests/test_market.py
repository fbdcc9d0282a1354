"""Market model tests: cones, builders, arbitrage check, round trips."""

from __future__ import annotations

import math
import random

import pytest

from gamehedge.geometry import polar_cone
from gamehedge.market import (
    KornMullerParams,
    ModelError,
    build_korn_muller,
    build_tree,
    check_no_arbitrage,
    load_model,
    model_to_spec,
    solvency_cone,
    unfold,
)
from gamehedge.rational import ONE, qvec, rational

Q = rational


def test_solvency_cone_frictionless_halfplane():
    cone = solvency_cone(((ONE, ONE), (ONE, ONE)))
    # no friction: holdings with nonnegative total value are solvent
    assert cone.contains((5, -5))
    assert cone.contains((-3, 3))
    assert not cone.contains((-1, Q(9, 10)))
    assert len(cone.hrep_rows) == 1


def test_solvency_cone_spread_polar():
    rates = ((ONE, Q(13)), (Q(1, 10), ONE))
    polar = polar_cone(solvency_cone(rates))
    gens = {tuple(g) for g in polar.generators}
    assert qvec((1, 10)) in gens and qvec((1, 13)) in gens


def test_solvency_cone_rejects_nonpositive():
    with pytest.raises(ModelError):
        solvency_cone(((ONE, Q(0)), (Q(2), ONE)))


def test_polar_frictionless_single_ray():
    polar = polar_cone(solvency_cone(((ONE, Q(12)), (Q(1, 12), ONE))))
    gens = [tuple(g) for g in polar.generators]
    assert gens == [qvec((1, 12))]


def test_korn_muller_cone_generator_count():
    params = KornMullerParams(2, (40, 50), 0.15, 0.1, 0.5, Q("0.005"))
    m = build_korn_muller(params)
    cone = m.cones(m.root).cone
    assert len(cone.generators) == 3 + 6


def test_build_tree_example1(example1):
    m, _ = example1
    assert m.d == 2 and m.horizon == 2
    assert [len(level) for level in m.levels] == [1, 2, 3]
    assert m.mode == "lattice"
    # node "ud" has two predecessors
    assert len(m.pred[m.node("ud")]) == 2


def test_build_tree_example2(example2):
    m, _ = example2
    assert m.horizon == 1 and len(m) == 3
    assert m.degenerate_nodes() == ["u", "d"]


def test_build_tree_single_node():
    m = build_tree(
        {
            "currencies": 2,
            "mode": "tree",
            "nodes": [{"id": "only", "time": 0, "successors": [], "rates": [[1, 2], [1, 1]]}],
        }
    )
    assert m.horizon == 0
    report = check_no_arbitrage(m)
    assert report.arbitrage_free


def test_build_tree_validation_errors():
    base = {
        "currencies": 2,
        "mode": "tree",
        "nodes": [
            {"id": "a", "time": 0, "successors": ["b"], "rates": [[1, 2], [1, 1]]},
            {"id": "b", "time": 1, "successors": [], "rates": [[1, 2], [1, 1]]},
        ],
    }
    bad = {**base, "nodes": [dict(base["nodes"][0], rates=[[1, 2], [1, 2]]), base["nodes"][1]]}
    with pytest.raises(ModelError):
        build_tree(bad)
    bad = {**base, "nodes": [dict(base["nodes"][0], rates=[[1, "-1"], [1, 1]]), base["nodes"][1]]}
    with pytest.raises(ModelError):
        build_tree(bad)
    bad = {**base, "nodes": [dict(base["nodes"][0], successors=["zzz"]), base["nodes"][1]]}
    with pytest.raises(ModelError):
        build_tree(bad)


def test_korn_muller_level_counts_and_rates():
    params = KornMullerParams(3, (40, 50), 0.15, 0.1, 0.5, Q("0.005"))
    m = build_korn_muller(params)
    for t in range(4):
        assert len(m.levels[t]) == math.comb(t + 3, 3)
    # settlement level duplicates the last real level
    assert len(m.levels[4]) == len(m.levels[3])
    # spot check the time-zero cross rate
    assert m.rates[m.root][0][1] == Q(50, 40) * Q("1.005")
    assert m.rates[m.root][0][0] == 1


def test_korn_muller_frictionless_reciprocity():
    params = KornMullerParams(2, (40, 50), 0.15, 0.1, 0.5, 0)
    m = build_korn_muller(params)
    for n in range(len(m)):
        pi = m.rates[n]
        for i in range(3):
            for j in range(3):
                assert pi[i][j] * pi[j][i] == 1


def test_korn_muller_recombination_exact():
    params = KornMullerParams(2, (40, 50), 0.15, 0.1, 0.5, 0)
    m = build_korn_muller(params)
    # factor products along different path orders agree bit-exactly: the
    # lattice at t=2 has C(5,3)=10 nodes, while 16 ordered paths exist
    assert len(m.levels[2]) == 10


def test_check_no_arbitrage_example2(example2):
    m, _ = example2
    report = check_no_arbitrage(m)
    assert report.arbitrage_free
    w = report.witness
    z_u = w.vector("u")
    z_d = w.vector("d")
    z_root = w.vector("root")
    assert all(x > 0 for x in z_root)
    # martingale aggregation and polar membership
    for j in range(2):
        assert z_root[j] == z_u[j] + z_d[j]
    assert 12 * z_u[0] == z_u[1]
    assert 9 * z_d[0] == z_d[1]
    assert 10 * z_root[0] <= z_root[1] <= 13 * z_root[0]


def test_arbitrage_detected_drifting_rates():
    # frictionless one-step binary; both successor rates above the initial
    spec = {
        "currencies": 2,
        "mode": "tree",
        "nodes": [
            {"id": "r", "time": 0, "successors": ["a", "b"], "rates": [[1, 10], ["1/10", 1]]},
            {"id": "a", "time": 1, "successors": [], "rates": [[1, 12], ["1/12", 1]]},
            {"id": "b", "time": 1, "successors": [], "rates": [[1, 11], ["1/11", 1]]},
        ],
    }
    report = check_no_arbitrage(build_tree(spec))
    assert not report.arbitrage_free


def test_korn_muller_frictionless_is_arbitrage_free():
    params = KornMullerParams(2, (40, 50), 0.15, 0.1, 0.5, 0)
    m = build_korn_muller(params)
    report = check_no_arbitrage(m)
    assert report.arbitrage_free


def test_spread_monotonicity_shrinks_solvency_cone():
    # componentwise wider rates admit fewer solvent portfolios and a larger
    # polar cone
    rng = random.Random(5)
    for _ in range(20):
        mid = Q(rng.randint(2, 30), rng.randint(1, 9))
        a = Q(rng.randint(0, 4), 10)
        b = Q(rng.randint(0, 4), 10)
        narrow = ((ONE, mid * (1 + a)), ((1 / mid) * (1 + b), ONE))
        wider = ((ONE, mid * (1 + a) * Q(11, 10)), ((1 / mid) * (1 + b) * Q(11, 10), ONE))
        k_narrow, k_wide = solvency_cone(narrow), solvency_cone(wider)
        for g in k_wide.generators:
            assert k_narrow.contains(g)
        p_narrow, p_wide = polar_cone(k_narrow), polar_cone(k_wide)
        for g in p_narrow.generators:
            assert p_wide.contains(g)


def test_unfold_lattice(example1):
    m, _ = example1
    tree, base = unfold(m)
    assert tree.mode == "tree"
    assert [len(level) for level in tree.levels] == [1, 2, 4]
    # unfolded nodes keep the base node rates
    for n in range(len(tree)):
        assert tree.rates[n] == m.rates[base[n]]


def test_model_round_trip(example1):
    m, _ = example1
    again = load_model(model_to_spec(m))
    assert again.labels == m.labels
    assert again.rates == m.rates
    assert again.succ == m.succ
