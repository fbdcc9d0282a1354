"""Game option payoffs.

A game option is an adapted triple of portfolio-valued payoffs per node:
what the buyer receives on exercise, what the seller delivers on
cancellation, and what changes hands when both act at once.  The ordering
constraint (cancellation at least as generous as simultaneous settlement,
which is at least as generous as plain exercise, both up to solvency) is
validated against the node's solvency cone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .market import Model
from .rational import ZERO, qvec, rational


class PayoffError(ValueError):
    """Malformed or inconsistent payoff description."""


@dataclass(frozen=True)
class PayoffViolation:
    node: str
    condition: str  # "cancel-vs-both" or "both-vs-exercise"
    vector: tuple

    def __str__(self):
        return f"ordering violated at node {self.node}: {self.condition} difference {self.vector} not solvent"


@dataclass(frozen=True)
class GamePayoff:
    """Per-node payoff triple; entries are rational portfolio vectors."""

    on_exercise: tuple  # paid if the buyer exercises first
    on_cancel: tuple  # paid if the seller cancels first
    on_both: tuple  # paid on simultaneous cancellation and exercise

    def dim(self) -> int:
        return len(self.on_exercise[0])


def validate_game_payoff(m: Model, g: GamePayoff):
    """Return None if the ordering constraint holds at every node, else the
    first violation (cancel − both and both − exercise must be solvent)."""
    n_nodes = len(m)
    for payoffs in (g.on_exercise, g.on_cancel, g.on_both):
        if len(payoffs) != n_nodes:
            raise PayoffError("payoff not defined on every node")
        for v in payoffs:
            if len(v) != m.d:
                raise PayoffError("payoff vector of wrong dimension")
    for n in range(n_nodes):
        cone = m.cones(n).cone
        diff = tuple(a - b for a, b in zip(g.on_cancel[n], g.on_both[n]))
        if not cone.contains(diff):
            return PayoffViolation(m.labels[n], "cancel-vs-both", diff)
        diff = tuple(a - b for a, b in zip(g.on_both[n], g.on_exercise[n]))
        if not cone.contains(diff):
            return PayoffViolation(m.labels[n], "both-vs-exercise", diff)
    return None


def negate_payoff(g: GamePayoff) -> GamePayoff:
    """The buyer's position as a seller problem: swap and negate the legs."""
    neg = lambda vs: tuple(tuple(-x for x in v) for v in vs)
    return GamePayoff(
        on_exercise=neg(g.on_cancel),
        on_cancel=neg(g.on_exercise),
        on_both=neg(g.on_both),
    )


def zero_payoff(m: Model) -> GamePayoff:
    zero = tuple(tuple(ZERO for _ in range(m.d)) for _ in range(len(m)))
    return GamePayoff(zero, zero, zero)


def basket_put(m: Model, strike, penalty) -> GamePayoff:
    """Game put with physical delivery of one unit each of currencies 1 and 2
    against ``strike`` in currency 3, cancellation penalty in currency 3.

    The model must carry the extra settlement step (all-zero payoffs there),
    so that neither party is forced to act by the nominal expiry.
    """
    if m.d != 3:
        raise PayoffError("basket put needs a three-currency model")
    if not m.meta.get("settlement_step"):
        raise PayoffError("basket put needs a model with a settlement step")
    strike = rational(strike)
    penalty = rational(penalty)
    if penalty < 0:
        raise PayoffError("cancellation penalty must be nonnegative")
    live_exercise = qvec((-1, -1, strike))
    live_cancel = qvec((-1, -1, strike + penalty))
    zero = qvec((0, 0, 0))
    horizon = m.horizon
    ex, ca, bo = [], [], []
    for n in range(len(m)):
        if m.times[n] == horizon:
            ex.append(zero)
            ca.append(zero)
            bo.append(zero)
        else:
            ex.append(live_exercise)
            ca.append(live_cancel)
            bo.append(live_cancel)
    return GamePayoff(tuple(ex), tuple(ca), tuple(bo))


def load_payoff(source, m: Model) -> GamePayoff:
    """Payoff from a dict, JSON text, or path: either explicit per-node
    triples or a basket put description."""
    if isinstance(source, GamePayoff):
        return source
    if isinstance(source, dict):
        spec = source
    else:
        text = source
        if "\n" not in str(source) and not str(source).lstrip().startswith("{"):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            spec = json.loads(text, parse_float=str)
        except json.JSONDecodeError as exc:
            raise PayoffError(f"option file is not valid JSON: {exc}") from None
    kind = spec.get("type")
    if kind == "basket_put":
        return basket_put(m, rational(spec["K"]), rational(spec["p"]))
    if kind != "explicit":
        raise PayoffError(f"unknown option type {kind!r}")
    payoffs = spec["payoffs"]
    ex, ca, bo = [], [], []
    for n in range(len(m)):
        label = m.labels[n]
        if label not in payoffs:
            raise PayoffError(f"no payoff for node {label}")
        entry = payoffs[label]
        try:
            ex.append(qvec(entry["Y"]))
            ca.append(qvec(entry["X"]))
            bo.append(qvec(entry["Xprime"]))
        except KeyError as exc:
            raise PayoffError(f"node {label}: payoff missing field {exc}") from None
    g = GamePayoff(tuple(ex), tuple(ca), tuple(bo))
    if g.dim() != m.d:
        raise PayoffError("payoff dimension does not match the model")
    return g


def payoff_to_spec(m: Model, g: GamePayoff) -> dict:
    from .rational import format_exact

    payoffs = {}
    for n in range(len(m)):
        payoffs[m.labels[n]] = {
            "Y": [format_exact(x) for x in g.on_exercise[n]],
            "X": [format_exact(x) for x in g.on_cancel[n]],
            "Xprime": [format_exact(x) for x in g.on_both[n]],
        }
    return {"type": "explicit", "payoffs": payoffs}
