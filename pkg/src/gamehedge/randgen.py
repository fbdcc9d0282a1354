"""Seeded random models and payoffs for verification runs.

Everything is generated from an explicit ``random.Random`` so runs are
reproducible: small binary trees with rational mid-rates and spreads,
filtered for absence of arbitrage, plus game payoffs built to satisfy the
ordering constraint by construction (the gaps between the legs are sampled
from the node's solvency cone).
"""

from __future__ import annotations

import random

from .market import Model, build_tree, check_no_arbitrage
from .options import GamePayoff
from .rational import ONE, ZERO, rational

Q = rational


def random_tree_spec(rng: random.Random, steps: int, branching: int = 2) -> dict:
    nodes = []
    counter = [0]

    def rate_matrix(mid):
        spread_a = Q(rng.randint(0, 3), 10)
        spread_b = Q(rng.randint(0, 3), 10)
        pi12 = mid * (1 + spread_a)
        pi21 = (1 / mid) * (1 + spread_b)
        return [["1", str(pi12)], [str(pi21), "1"]]

    def grow(t, mid):
        label = f"n{counter[0]}"
        counter[0] += 1
        entry = {"id": label, "time": t, "successors": [], "rates": rate_matrix(mid)}
        nodes.append(entry)
        if t < steps:
            for _ in range(branching):
                factor = Q(rng.randint(2, 8), rng.randint(2, 8))
                entry["successors"].append(grow(t + 1, mid * factor))
        return label

    grow(0, Q(rng.randint(2, 9), rng.randint(1, 4)))
    return {"currencies": 2, "mode": "tree", "nodes": nodes}


def random_arbitrage_free_model(
    rng: random.Random, steps: int, branching: int = 2, max_tries: int = 200
) -> Model:
    for _ in range(max_tries):
        m = build_tree(random_tree_spec(rng, steps, branching))
        if check_no_arbitrage(m).arbitrage_free:
            return m
    raise RuntimeError("could not sample an arbitrage-free model")


def _random_cone_element(rng: random.Random, m: Model, n: int):
    gens = m.cones(n).cone.generators
    out = [ZERO] * m.d
    for g in gens:
        if rng.random() < 0.5:
            continue
        w = Q(rng.randint(0, 4), rng.randint(1, 4))
        out = [a + w * x for a, x in zip(out, g)]
    return tuple(out)


def random_game_payoff(rng: random.Random, m: Model) -> GamePayoff:
    """Valid by construction: both leg gaps are solvency-cone elements."""
    ex, bo, ca = [], [], []
    for n in range(len(m)):
        y = tuple(Q(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(m.d))
        xp = tuple(a + b for a, b in zip(y, _random_cone_element(rng, m, n)))
        x = tuple(a + b for a, b in zip(xp, _random_cone_element(rng, m, n)))
        ex.append(y)
        bo.append(xp)
        ca.append(x)
    return GamePayoff(tuple(ex), tuple(ca), tuple(bo))


def random_stopping_mass(rng: random.Random, m: Model):
    """Adapted nonnegative masses summing to one on every path."""
    from .duality import RandomisedStoppingTime

    mass = {}

    def walk(n, remaining):
        if m.is_terminal(n):
            mass[n] = remaining
            return
        here = remaining * Q(rng.randint(0, 4), 4)
        mass[n] = here
        for c in m.succ[n]:
            walk(c, remaining - here)

    walk(m.root, ONE)
    return RandomisedStoppingTime(mass)
