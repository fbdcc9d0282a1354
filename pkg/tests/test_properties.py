"""Invariant suites on seeded random models: cone characterisations,
stability of hedge sets, stopping-mass conservation, weak duality, and
oracle agreement (the full-size oracle run lives in the acceptance suite).
"""

from __future__ import annotations

import random

import pytest

from gamehedge.duality import (
    ask_oracle,
    check_approx_pair,
    dual_objective,
    enumerate_stopping_times,
    martingale_pair_from_witness,
    primal_lp_ask,
    tail_mass,
    truncate,
)
from gamehedge.market import check_no_arbitrage
from gamehedge.options import negate_payoff, validate_game_payoff
from gamehedge.pricing import ask_price, bid_price, buyer_sets, seller_sets
from gamehedge.randgen import (
    random_arbitrage_free_model,
    random_game_payoff,
    random_stopping_mass,
)
from gamehedge.rational import rational

Q = rational


@pytest.fixture(scope="module")
def corpus():
    rng = random.Random(20240901)
    out = []
    for _ in range(12):
        m = random_arbitrage_free_model(rng, steps=rng.choice([1, 2, 2, 3]))
        g = random_game_payoff(rng, m)
        out.append((m, g))
    return out


def test_generated_payoffs_valid(corpus):
    for m, g in corpus:
        assert validate_game_payoff(m, g) is None


def test_polar_characterisation_sampled(corpus):
    rng = random.Random(7)
    for m, _ in corpus[:6]:
        for n in range(len(m)):
            cone = m.cones(n).cone
            polar = m.cones(n).polar
            pi = m.rates[n]
            for _ in range(20):
                w = tuple(Q(rng.randint(-12, 12), rng.randint(1, 4)) for _ in range(m.d))
                direct = all(x >= 0 for x in w) and all(
                    pi[i][j] * w[i] - w[j] >= 0
                    for i in range(m.d)
                    for j in range(m.d)
                    if i != j
                )
                assert polar.contains(w) == direct
                assert direct == all(
                    sum(wi * gi for wi, gi in zip(w, gen)) >= 0
                    for gen in cone.generators
                )


def test_hedge_sets_absorb_the_cone(corpus):
    # every sampled member of a hedge set stays inside after adding any
    # solvency generator
    rng = random.Random(11)
    for m, g in corpus[:5]:
        fam = seller_sets(m, g)
        for n in range(len(m)):
            u = fam.hedge[n]
            gens = m.cones(n).cone.generators
            samples = []
            for piece in u.pieces:
                samples.extend(piece.points[:2])
            for x in samples[:4]:
                assert u.contains(x)
                for gen in gens:
                    shifted = tuple(a + b for a, b in zip(x, gen))
                    assert u.contains(shifted), (m.labels[n], x, gen)


def test_truncation_conserves_mass(corpus):
    rng = random.Random(13)
    for m, _ in corpus[:6]:
        chi = random_stopping_mass(rng, m)
        chi.validate(m)
        for sigma in enumerate_stopping_times(m):
            cut = truncate(m, chi, sigma)
            cut.validate(m)  # nonnegative, sums to one on every path
            tails = tail_mass(m, chi)
            for n in sigma.stop_nodes:
                assert cut.mass[n] == tails[n]


def test_weak_duality_sampled(corpus):
    rng = random.Random(17)
    for m, g in corpus[:6]:
        witness = check_no_arbitrage(m).witness
        pair = martingale_pair_from_witness(m, witness, 1)
        for sigma in enumerate_stopping_times(m):
            lp_value = primal_lp_ask(m, g, sigma, 1)
            for _ in range(3):
                chi = random_stopping_mass(rng, m)
                cut = truncate(m, chi, sigma)
                assert check_approx_pair(pair, cut, m, 1)
                value = dual_objective(sigma, chi, pair, g, 1, m)
                assert value <= lp_value, (value, lp_value)


def test_oracle_agreement_small_corpus(corpus):
    for m, g in corpus[:6]:
        fam = seller_sets(m, g)
        for i in (1, 2):
            assert ask_price(fam, i) == ask_oracle(m, g, i).value


def test_symmetry_identity(corpus):
    for m, g in corpus:
        fam_b = buyer_sets(m, g)
        fam_neg = seller_sets(m, negate_payoff(g))
        for i in (1, 2):
            assert bid_price(fam_b, i) == -ask_price(fam_neg, i)


def test_bid_below_ask(corpus):
    for m, g in corpus:
        fam = seller_sets(m, g)
        fam_b = buyer_sets(m, g)
        for i in (1, 2):
            assert bid_price(fam_b, i) <= ask_price(fam, i)


def _paths_and_stops(tree):
    import itertools

    paths = []

    def walk(n, acc):
        acc = acc + [n]
        if not tree.succ[n]:
            paths.append(acc)
        for c in tree.succ[n]:
            walk(c, acc)

    walk(tree.root, [])

    def against(n):
        options = [[n]]
        if tree.succ[n]:
            for combo in itertools.product(*(against(c) for c in tree.succ[n])):
                options.append([x for part in combo for x in part])
        return options

    stops = [frozenset(nodes) for nodes in against(tree.root)]
    return paths, stops


def test_strategies_settle_solvently_exhaustive(corpus):
    from gamehedge.pricing import buyer_strategy, seller_strategy, simulate

    for m, g in corpus[:4]:
        for build, fam in (
            (seller_strategy, seller_sets(m, g)),
            (buyer_strategy, buyer_sets(m, g)),
        ):
            strategy = build(fam, 1)
            tree = strategy.tree
            # the rebalancing plan is self-financing at every node
            for n in range(len(tree)):
                y = strategy.holdings[n]
                for c in tree.succ[n]:
                    diff = tuple(a - b for a, b in zip(y, strategy.holdings[c]))
                    assert tree.cones(n).cone.contains(diff)
            paths, stops = _paths_and_stops(tree)
            for path in paths:
                for stop in stops:
                    report = simulate(strategy, g, path, stop)
                    assert report.solvent, (strategy.side, report)


def test_lattice_prices_match_unfolded_tree(example1):
    from gamehedge.market import unfold
    from gamehedge.options import GamePayoff

    m, g = example1
    tree, base = unfold(m)
    lift = lambda vs: tuple(vs[base[n]] for n in range(len(tree)))
    g_tree = GamePayoff(lift(g.on_exercise), lift(g.on_cancel), lift(g.on_both))
    fam_lattice = seller_sets(m, g)
    fam_tree = seller_sets(tree, g_tree)
    for i in (1, 2):
        assert ask_price(fam_lattice, i) == ask_price(fam_tree, i)
        assert bid_price(buyer_sets(m, g), i) == bid_price(buyer_sets(tree, g_tree), i)


def test_piece_cap_guard(example1):
    from gamehedge.pricing import PieceCapExceeded

    m, g = example1
    with pytest.raises(PieceCapExceeded):
        seller_sets(m, g, piece_cap=1)


def test_penalty_monotonicity_small_lattice():
    from gamehedge.market import KornMullerParams, build_korn_muller
    from gamehedge.options import basket_put

    m = build_korn_muller(KornMullerParams(3, (40, 50), 0.15, 0.1, 0.5, Q("0.005")))
    asks, bids = [], []
    for p in (0, 1, 5, 20):
        g = basket_put(m, 100, p)
        asks.append(ask_price(seller_sets(m, g), 3))
        bids.append(bid_price(buyer_sets(m, g), 3))
    assert asks == sorted(asks)
    assert bids == sorted(bids)
