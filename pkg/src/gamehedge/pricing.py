"""Set-valued backward recursion for game-option hedging prices.

For the seller, each node carries the set of portfolios that settle
cancellation now (``cancel_cover``), the set that settles exercise now
(``exercise_cover``), the set hedging the future (``carry``), the portfolios
rebalancing into it (``prehedge = carry + cone``), and finally
``hedge = (prehedge ∩ exercise_cover) ∪ cancel_cover``.  The union makes the
sets non-convex in general, so they are stored as pruned polyhedral unions.
The buyer's problem is the same recursion applied to the negated/swapped
payoff; the American variants simply drop the branch the counterparty no
longer has.

Ask and bid prices are the extreme points of the root hedge set along a
currency axis, and optimal strategies come from a forward walk through the
stored sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    PolyhedralUnion,
    min_coordinate,
    union_add_cone,
    union_intersect,
    union_union,
)
from .market import Model, unfold
from .options import GamePayoff, negate_payoff, validate_game_payoff
from .rational import ZERO, qvec, rational


class PieceCapExceeded(RuntimeError):
    def __init__(self, label, count, cap):
        super().__init__(
            f"hedge set at node {label} has {count} pieces (cap {cap}); "
            "raise the piece cap or simplify the model"
        )
        self.label = label
        self.count = count
        self.cap = cap


class PayoffInvalid(ValueError):
    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation


@dataclass
class SetFamily:
    """Per-node hedging sets from the backward recursion."""

    model: Model
    payoff: GamePayoff
    side: str  # "seller" | "buyer"
    style: str  # "game" | "american"
    exercise_cover: list  # ConvexPolyhedron per node
    cancel_cover: list  # ConvexPolyhedron per node
    carry: list  # PolyhedralUnion per node (None on terminal nodes)
    prehedge: list  # PolyhedralUnion per node (None on terminal nodes)
    hedge: list  # PolyhedralUnion per node

    def max_pieces(self) -> int:
        return max(len(u.pieces) for u in self.hedge if u is not None)


def _upper_sets(m, g, style, piece_cap):
    """Common engine; ``g`` is already oriented for the side being priced."""
    n_nodes = len(m)
    horizon = m.horizon
    exercise_cover = [None] * n_nodes
    cancel_cover = [None] * n_nodes
    carry = [None] * n_nodes
    prehedge = [None] * n_nodes
    hedge = [None] * n_nodes

    for n in range(n_nodes):
        cone_poly = m.cones(n).poly
        exercise_cover[n] = cone_poly.translate(g.on_exercise[n])
        if style == "american_buyer":
            # the single settle-now set, for every time including the horizon
            cancel_cover[n] = cone_poly.translate(g.on_cancel[n])
        elif m.times[n] == horizon:
            cancel_cover[n] = cone_poly.translate(g.on_both[n])
        else:
            cancel_cover[n] = cone_poly.translate(g.on_cancel[n])

    for t in range(horizon, -1, -1):
        for n in m.levels[t]:
            if t == horizon:
                terminal = (
                    exercise_cover[n] if style == "american_seller" else cancel_cover[n]
                )
                hedge[n] = PolyhedralUnion.of(m.d, [terminal])
                continue
            acc = hedge[m.succ[n][0]]
            for c in m.succ[n][1:]:
                acc = union_intersect(acc, hedge[c])
            carry[n] = acc
            reach = union_add_cone(acc, m.cones(n).cone)
            prehedge[n] = reach
            if style == "game":
                z = union_union(
                    union_intersect(reach, PolyhedralUnion(m.d, (exercise_cover[n],))),
                    PolyhedralUnion(m.d, (cancel_cover[n],)),
                )
            elif style == "american_seller":
                z = union_intersect(reach, PolyhedralUnion(m.d, (exercise_cover[n],)))
            else:  # american_buyer: settle now or carry on
                z = union_union(reach, PolyhedralUnion(m.d, (cancel_cover[n],)))
            hedge[n] = z
            if len(z.pieces) > piece_cap:
                raise PieceCapExceeded(m.labels[n], len(z.pieces), piece_cap)
    return exercise_cover, cancel_cover, carry, prehedge, hedge


def _validated(m, g):
    violation = validate_game_payoff(m, g)
    if violation is not None:
        raise PayoffInvalid(violation)


def seller_sets(m: Model, g: GamePayoff, piece_cap: int = 512) -> SetFamily:
    _validated(m, g)
    return SetFamily(m, g, "seller", "game", *_upper_sets(m, g, "game", piece_cap))


def buyer_sets(m: Model, g: GamePayoff, piece_cap: int = 512) -> SetFamily:
    """Buyer hedging sets: the seller recursion on the swapped negated payoff."""
    _validated(m, g)
    flipped = negate_payoff(g)
    return SetFamily(m, g, "buyer", "game", *_upper_sets(m, flipped, "game", piece_cap))


def american_sets(m: Model, g: GamePayoff, side: str, piece_cap: int = 512) -> SetFamily:
    """No-cancellation variant used for American-option comparisons.

    The seller must cover exercise at every time; the buyer chooses a single
    exercise and may simply carry until then.
    """
    _validated(m, g)
    if side == "seller":
        return SetFamily(
            m, g, "seller", "american", *_upper_sets(m, g, "american_seller", piece_cap)
        )
    if side != "buyer":
        raise ValueError("side must be 'seller' or 'buyer'")
    # the buyer's settle-now sets -Y + K arrive as the flipped cancel leg
    flipped = negate_payoff(g)
    return SetFamily(
        m, g, "buyer", "american", *_upper_sets(m, flipped, "american_buyer", piece_cap)
    )


def ask_price(fam: SetFamily, currency: int):
    """Least initial endowment in the given currency (1-based) hedging the
    seller's position; ``-inf`` signals a pathology, ``+inf`` an empty set."""
    if fam.side != "seller":
        raise ValueError("ask_price needs seller sets")
    return min_coordinate(fam.hedge[fam.model.root], currency - 1)


def bid_price(fam: SetFamily, currency: int):
    """Greatest amount the buyer can raise against the claim."""
    if fam.side != "buyer":
        raise ValueError("bid_price needs buyer sets")
    return -min_coordinate(fam.hedge[fam.model.root], currency - 1)


@dataclass(frozen=True)
class PriceReport:
    """Bid and ask per currency (1-based keys), with model diagnostics.

    ``hold_bounds`` carry the buy-and-hold cost per currency: holding that
    many units outright hedges the seller against anything, so it is a crude
    upper sanity bound for the ask.
    """

    asks: dict
    bids: dict
    hold_bounds: dict
    degenerate_nodes: tuple = ()
    arbitrage_free: bool | None = None

    def spread_ok(self) -> bool:
        for i, ask in self.asks.items():
            bid = self.bids[i]
            if isinstance(ask, float) or isinstance(bid, float):
                return False
            if bid > ask:
                return False
        return True


def buy_and_hold_bound(m: Model, g: GamePayoff, currency: int):
    """Endowment in one currency that can buy out the largest payoff leg at
    any node outright; always hedges the seller."""
    i = currency - 1
    worst = ZERO
    for n in range(len(m)):
        pi = m.rates[n]
        total = ZERO
        for j in range(m.d):
            size = max(
                abs(g.on_exercise[n][j]), abs(g.on_cancel[n][j]), abs(g.on_both[n][j])
            )
            total += rational(pi[i][j]) * size
        if total > worst:
            worst = total
    return worst


def price_report(m, g, piece_cap=512, arbitrage=None, style="game") -> PriceReport:
    if style == "american":
        ask_fam = american_sets(m, g, "seller", piece_cap)
        bid_fam = american_sets(m, g, "buyer", piece_cap)
    else:
        ask_fam = seller_sets(m, g, piece_cap)
        bid_fam = buyer_sets(m, g, piece_cap)
    currencies = range(1, m.d + 1)
    return PriceReport(
        asks={i: ask_price(ask_fam, i) for i in currencies},
        bids={i: bid_price(bid_fam, i) for i in currencies},
        hold_bounds={i: buy_and_hold_bound(m, g, i) for i in currencies},
        degenerate_nodes=tuple(m.degenerate_nodes()),
        arbitrage_free=arbitrage,
    )


# ---------------------------------------------------------------------------
# optimal strategies (forward walk through the stored sets)


@dataclass
class HedgingStrategy:
    """Predictable portfolio process plus a stopping decision on the path tree.

    ``holdings[n]`` is the portfolio held at tree node ``n`` (already chosen
    at its predecessor); ``stop_nodes`` is the adapted antichain where the
    strategy cancels (seller) or exercises (buyer).
    """

    side: str
    currency: int
    price: object
    tree: Model
    base: tuple
    holdings: dict
    stop_nodes: frozenset

    def stop_time_on_path(self, path) -> int:
        for n in path:
            if n in self.stop_nodes:
                return self.tree.times[n]
        return self.tree.horizon


def _choice_point(carry_sets, current, cone_data):
    """Deterministic selection from carry ∩ [current − cone]: the smallest
    vertex (lexicographically) of the first nonempty piece."""
    shifted = cone_data.neg_poly.translate(current)
    options = union_intersect(carry_sets, PolyhedralUnion(shifted.dim, (shifted,)))
    if options.is_empty:
        return None
    piece = options.pieces[0]
    return min(piece.points)


def _strategy(fam: SetFamily, currency: int, price) -> HedgingStrategy:
    m = fam.model
    if isinstance(price, float):
        raise ValueError("strategy requires a finite price")
    tree, base = (m, tuple(range(len(m)))) if m.mode == "tree" else unfold(m)
    start = [ZERO] * m.d
    start[currency - 1] = rational(price)  # seller: ask, buyer: -bid
    holdings = {tree.root: qvec(start)}
    stop_nodes = set()
    order = [tree.root]
    stack = [tree.root]
    while stack:
        n = stack.pop()
        for c in tree.succ[n]:
            stack.append(c)
            order.append(c)
    # breadth does not matter; parents precede children by construction
    for n in order:
        b = base[n]
        y = holdings[n]
        stopped_above = any(a in stop_nodes for a in _ancestors(tree, n))
        if stopped_above:
            for c in tree.succ[n]:
                holdings[c] = y
            continue
        if fam.cancel_cover[b].contains_point(y):
            stop_nodes.add(n)
            for c in tree.succ[n]:
                holdings[c] = y
            continue
        if tree.is_terminal(n):
            raise AssertionError(
                f"terminal node {tree.labels[n]} reached without a settle set"
            )
        assert fam.hedge[b].contains(y), f"strategy left the hedge set at {tree.labels[n]}"
        nxt = _choice_point(fam.carry[b], y, m.cones(b))
        assert nxt is not None, f"empty rebalancing choice at {tree.labels[n]}"
        for c in tree.succ[n]:
            holdings[c] = nxt
    return HedgingStrategy(
        side=fam.side,
        currency=currency,
        price=price,
        tree=tree,
        base=base,
        holdings=holdings,
        stop_nodes=frozenset(stop_nodes),
    )


def _ancestors(tree, n):
    out = []
    while tree.pred[n]:
        n = tree.pred[n][0]
        out.append(n)
    return out


def seller_strategy(fam: SetFamily, currency: int) -> HedgingStrategy:
    """Optimal cancellation time and rebalancing plan from the ask price."""
    if fam.side != "seller" or fam.style != "game":
        raise ValueError("seller_strategy needs seller game sets")
    return _strategy(fam, currency, ask_price(fam, currency))


def buyer_strategy(fam: SetFamily, currency: int) -> HedgingStrategy:
    """Optimal exercise time and rebalancing plan from the bid price.

    The walk runs on the flipped problem, so the stored holdings hedge the
    buyer's liability ``-bid`` in the chosen currency.
    """
    if fam.side != "buyer" or fam.style != "game":
        raise ValueError("buyer_strategy needs buyer game sets")
    return _strategy(fam, currency, -bid_price(fam, currency))


# ---------------------------------------------------------------------------
# settlement simulation


@dataclass(frozen=True)
class SettlementReport:
    settled_at: int
    node: str
    holding: tuple
    payoff: tuple
    post: tuple
    solvent: bool
    exchanges: tuple | None
    final_holdings: tuple | None

    def __str__(self):
        from .rational import format_exact

        vec = lambda v: "(" + ", ".join(format_exact(x) for x in v) + ")"
        status = "solvent" if self.solvent else "NOT SOLVENT"
        return (
            f"settled at t={self.settled_at} node {self.node}: holding {vec(self.holding)}, "
            f"payoff {vec(self.payoff)}, post-settlement {vec(self.post)} ({status})"
        )


def simulate(strategy: HedgingStrategy, g: GamePayoff, scenario, counterparty_stop) -> SettlementReport:
    """Settle the strategy along one scenario against a counterparty stop.

    ``scenario`` is a root-to-leaf node sequence in the strategy's path tree;
    ``counterparty_stop`` maps the scenario to a time (an int, or a set of
    tree nodes forming an adapted antichain).  Checks the hedging inequality
    at the settlement node and reports the solvent decomposition.
    """
    tree, base = strategy.tree, strategy.base
    own = strategy.stop_time_on_path(scenario)
    if isinstance(counterparty_stop, int):
        other = counterparty_stop
    else:
        other = tree.horizon
        for n in scenario:
            if n in counterparty_stop:
                other = tree.times[n]
                break
    t = min(own, other)
    node = scenario[t]
    b = base[node]
    if strategy.side == "seller":
        sigma, tau = own, other
    else:
        sigma, tau = other, own
    if sigma < tau:
        q = g.on_cancel[b]
    elif tau < sigma:
        q = g.on_exercise[b]
    else:
        q = g.on_both[b]
    y = strategy.holdings[node]
    if strategy.side == "seller":
        post = tuple(a - b_ for a, b_ in zip(y, q))
    else:
        post = tuple(a + b_ for a, b_ in zip(y, q))
    cone = tree.cones(node).cone
    solvent = cone.contains(post)
    exchanges, final = _solvent_decomposition(tree.rates[node], post) if solvent else (None, None)
    return SettlementReport(
        settled_at=t,
        node=tree.labels[node],
        holding=tuple(y),
        payoff=tuple(q),
        post=post,
        solvent=solvent,
        exchanges=exchanges,
        final_holdings=final,
    )


def _solvent_decomposition(rates, post):
    """Exchange amounts beta[i][j] turning a solvent portfolio nonnegative."""
    from .linprog import LinearProgram, lp_solve

    d = len(post)
    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    nvar = len(pairs)
    rows = []
    for i in range(d):
        row = [ZERO] * nvar
        for k, (a, bda) in enumerate(pairs):
            if bda == i:
                row[k] += 1
            if a == i:
                row[k] -= rational(rates[a][bda])
        rows.append((tuple(row), -rational(post[i]), False))
    lp = LinearProgram(
        objective=tuple([ZERO] * nvar),
        rows=tuple(rows),
        nonneg=tuple([True] * nvar),
    )
    result = lp_solve(lp)
    if result.status != "optimal":
        return None, None
    beta = result.point
    final = []
    for i in range(d):
        v = rational(post[i])
        for k, (a, bda) in enumerate(pairs):
            if bda == i:
                v += beta[k]
            if a == i:
                v -= rational(rates[a][bda]) * beta[k]
        final.append(v)
    return tuple(beta), tuple(final)


# ---------------------------------------------------------------------------
# diagnostics


def dump_sets(fam: SetFamily) -> str:
    """Exact H-representations of the hedge sets, one block per node."""
    lines = []
    m = fam.model
    for t in range(m.horizon + 1):
        for n in m.levels[t]:
            u = fam.hedge[n]
            lines.append(f"node {m.labels[n]} t={t} pieces={len(u.pieces)}")
            for i, piece in enumerate(u.pieces):
                lines.append(f"  piece {i + 1}:")
                for h in piece.halfspaces:
                    lines.append(f"    {h}")
    return "\n".join(lines) + "\n"
