"""Randomised stopping times, approximate martingale pairs, and the exact
linear-programming oracle for hedging prices.

The oracle side works on path trees only: stopping times are enumerated as
adapted antichains, and for each cancellation time the seller's problem
reduces to superhedging an exercise-only claim with random expiry, which is a
plain linear program over self-financing rebalancing plans.  Minimising over
cancellation times reproduces the ask price independently of the set-valued
recursion, which is what the verification command checks.

The dual objective of the price representation is evaluated exactly for
given randomised stopping times and (probability, price-process) pairs, and
the untruncated variant of the objective is maximised in closed form at
one-step scale to exhibit how the two representations differ.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linprog import LinearProgram, lp_solve
from .market import Model, ModelError
from .options import GamePayoff, negate_payoff
from .rational import ONE, ZERO, Rational, qdot, rational


class OracleError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# stopping times


@dataclass(frozen=True)
class StoppingTime:
    """Adapted stopping rule on a path tree: the antichain of stop nodes."""

    stop_nodes: frozenset

    def time_on_path(self, m: Model, path) -> int:
        for n in path:
            if n in self.stop_nodes:
                return m.times[n]
        raise ValueError("path does not meet the stopping antichain")

    @staticmethod
    def constant(m: Model, t: int) -> "StoppingTime":
        return StoppingTime(frozenset(m.levels[t]))


def _require_tree(m: Model):
    if m.mode != "tree":
        raise ModelError("oracle computations need a path tree; unfold first")


def count_stopping_times(m: Model) -> int:
    _require_tree(m)
    memo = {}

    def count(n):
        if not m.succ[n]:
            return 1
        if n not in memo:
            prod = 1
            for c in m.succ[n]:
                prod *= count(c)
            memo[n] = 1 + prod
        return memo[n]

    return count(m.root)


def enumerate_stopping_times(m: Model, limit: int = 100_000):
    """All stopping times of a small tree, root-stop first, duplicate-free."""
    _require_tree(m)
    total = count_stopping_times(m)
    if total > limit:
        raise OracleError(f"{total} stopping times exceed the enumeration limit {limit}")

    def enum(n):
        options = [frozenset([n])]
        if m.succ[n]:
            parts = [enum(c) for c in m.succ[n]]
            for combo in itertools.product(*parts):
                options.append(frozenset().union(*combo))
        return options

    return [StoppingTime(nodes) for nodes in enum(m.root)]


# ---------------------------------------------------------------------------
# randomised stopping times


@dataclass(frozen=True)
class RandomisedStoppingTime:
    """Nonnegative adapted mass per node, summing to one along every path."""

    mass: dict

    @staticmethod
    def from_stopping_time(st: StoppingTime, m: Model) -> "RandomisedStoppingTime":
        mass = {n: (ONE if n in st.stop_nodes else ZERO) for n in range(len(m))}
        return RandomisedStoppingTime(mass)

    def validate(self, m: Model):
        for n in range(len(m)):
            if self.mass.get(n, ZERO) < 0:
                raise ValueError(f"negative stopping mass at {m.labels[n]}")
        for leaf in m.terminals():
            total = sum(self.mass.get(n, ZERO) for n in _path_to(m, leaf))
            if total != 1:
                raise ValueError(f"stopping mass along {m.labels[leaf]} sums to {total}")


def _path_to(m: Model, leaf):
    path = [leaf]
    while m.pred[path[-1]]:
        path.append(m.pred[path[-1]][0])
    return list(reversed(path))


def tail_mass(m: Model, chi: RandomisedStoppingTime) -> dict:
    """Remaining stopping mass at each node: one minus the mass spent strictly
    above it (a predictable process; equals one at the root)."""
    out = {}

    def walk(n, spent):
        out[n] = 1 - spent
        for c in m.succ[n]:
            walk(c, spent + chi.mass.get(n, ZERO))

    walk(m.root, ZERO)
    return out


def value_at(m: Model, process: dict, chi: RandomisedStoppingTime) -> dict:
    """Mass-weighted value of an adapted scalar process: a terminal random
    variable, reported per leaf."""
    out = {}
    for leaf in m.terminals():
        total = ZERO
        for n in _path_to(m, leaf):
            total += chi.mass.get(n, ZERO) * process[n]
        out[leaf] = total
    return out


def truncate(m: Model, chi: RandomisedStoppingTime, sigma: StoppingTime) -> RandomisedStoppingTime:
    """Collapse all residual mass onto the stopping time: before it the mass is
    unchanged, at it the whole tail, after it nothing."""
    tails = tail_mass(m, chi)
    mass = {}

    def walk(n, stopped):
        if n in sigma.stop_nodes and not stopped:
            mass[n] = tails[n]
            stopped = True
        elif stopped:
            mass[n] = ZERO
        else:
            mass[n] = chi.mass.get(n, ZERO)
        for c in m.succ[n]:
            walk(c, stopped)

    walk(m.root, False)
    return RandomisedStoppingTime(mass)


# ---------------------------------------------------------------------------
# approximate martingale pairs


@dataclass(frozen=True)
class ApproxPair:
    """Terminal probabilities plus a price process attached to every node."""

    probability: dict  # leaf node -> weight (nonnegative, sums to one)
    prices: dict  # node -> rational vector

    def node_probability(self, m: Model) -> dict:
        out = {n: ZERO for n in range(len(m))}
        for leaf, p in self.probability.items():
            for n in _path_to(m, leaf):
                out[n] += p
        return out


def check_approx_pair(
    pair: ApproxPair, chi: RandomisedStoppingTime, m: Model, currency: int
) -> bool:
    """Exact verification of the approximate-martingale conditions for ``chi``:
    prices sit in the polar cone (nonzero, normalised in ``currency``), and
    the conditional tail-weighted expectations stay in the polar cone."""
    _require_tree(m)
    i = currency - 1
    total = sum(pair.probability.values())
    if total != 1 or any(p < 0 for p in pair.probability.values()):
        return False
    for n in range(len(m)):
        s = pair.prices[n]
        if s[i] != 1:
            return False
        if all(x == 0 for x in s):
            return False
        if not m.cones(n).polar.contains(s):
            return False
    # conditional condition, cleared of divisions: for each node, the
    # probability-weighted sum over descendants of tail stopping mass times
    # prices must lie in the node's polar cone
    downs = {}

    def accumulate(n):
        vec = [ZERO] * m.d
        if not m.succ[n]:
            p = pair.probability.get(n, ZERO)
            contrib = [p * chi.mass.get(n, ZERO) * x for x in pair.prices[n]]
            vec = contrib
        else:
            for c in m.succ[n]:
                child = accumulate(c)
                vec = [a + b for a, b in zip(vec, child)]
            p_here = _subtree_probability(m, pair, n)
            vec = [a + p_here * chi.mass.get(n, ZERO) * x for a, x in zip(vec, pair.prices[n])]
        downs[n] = vec
        return vec

    accumulate(m.root)
    for n in range(len(m)):
        if m.is_terminal(n):
            continue  # the tail beyond the horizon is empty
        expected = [ZERO] * m.d
        for c in m.succ[n]:
            expected = [a + b for a, b in zip(expected, downs[c])]
        if not m.cones(n).polar.contains(tuple(expected)):
            return False
    return True


def _subtree_probability(m, pair, n):
    if not m.succ[n]:
        return pair.probability.get(n, ZERO)
    return sum(_subtree_probability(m, pair, c) for c in m.succ[n])


def martingale_pair_from_witness(m: Model, witness, currency: int) -> ApproxPair:
    """Equivalent martingale pair built from a consistent price witness by a
    change of numeraire to the chosen currency."""
    i = currency - 1
    prices = {}
    for n in range(len(m)):
        z = witness.vector(m.labels[n])
        if z[i] <= 0:
            raise ValueError("witness must be strictly positive")
        prices[n] = tuple(x / z[i] for x in z)
    root_scale = witness.vector(m.labels[m.root])[i]
    probability = {
        leaf: witness.vector(m.labels[leaf])[i] / root_scale for leaf in m.terminals()
    }
    return ApproxPair(probability, prices)


def dual_objective(
    sigma: StoppingTime,
    chi: RandomisedStoppingTime,
    pair: ApproxPair,
    g: GamePayoff,
    currency: int,
    m: Model,
) -> Rational:
    """Expected stopped-and-truncated payoff value for a cancellation time,
    stopping mass, and normalised price pair (exact)."""
    _require_tree(m)
    total = ZERO
    for leaf, p in pair.probability.items():
        if p == 0:
            continue
        path = _path_to(m, leaf)
        stop_idx = next(
            (k for k, n in enumerate(path) if n in sigma.stop_nodes), len(path) - 1
        )
        value = ZERO
        spent = ZERO
        for k in range(stop_idx):
            n = path[k]
            mass = chi.mass.get(n, ZERO)
            value += mass * qdot(g.on_exercise[n], pair.prices[n])
            spent += mass
        n = path[stop_idx]
        mass_here = chi.mass.get(n, ZERO)
        tail_after = 1 - spent - mass_here
        value += mass_here * qdot(g.on_both[n], pair.prices[n])
        value += tail_after * qdot(g.on_cancel[n], pair.prices[n])
        total += p * value
    return total


# ---------------------------------------------------------------------------
# the primal oracle


def primal_lp_ask(m: Model, g: GamePayoff, sigma: StoppingTime, currency: int) -> Rational:
    """Cheapest endowment in ``currency`` hedging the seller when cancellation
    is committed to ``sigma``: a single exact linear program.

    The claim to cover at nodes strictly before the stop is the exercise
    payoff, at the stop node the cancellation payoff (the simultaneous payoff
    at the horizon), and nothing afterwards.  Self-financing rebalancing uses
    explicit nonnegative currency-exchange amounts.
    """
    _require_tree(m)
    i = currency - 1
    d = m.d

    live = {}  # node -> True when sigma has not stopped strictly above it

    def mark(n, stopped):
        live[n] = not stopped
        here = stopped or n in sigma.stop_nodes
        for c in m.succ[n]:
            mark(c, here)

    mark(m.root, False)

    rebalanced = [
        n
        for n in range(len(m))
        if live[n] and n not in sigma.stop_nodes and not m.is_terminal(n)
    ]
    # variables: z, then a portfolio vector per rebalanced node (the holding
    # chosen there for the next period), then exchange amounts per membership
    var_of_node = {}
    nvar = 1
    for n in rebalanced:
        var_of_node[n] = nvar
        nvar += d

    pairs = [(a, b) for a in range(d) for b in range(d) if a != b]
    memberships = []  # (node, holder_expr, target_vector)

    def holding_expr(n):
        """Coefficient row template for the portfolio held AT node n."""
        parent = m.pred[n][0] if m.pred[n] else None
        if parent is None:
            return ("root", None)
        if parent in var_of_node:
            return ("var", var_of_node[parent])
        return holding_expr(parent)  # frozen through stopped/dead nodes

    for n in range(len(m)):
        if not live[n]:
            continue
        if n in sigma.stop_nodes:
            target = g.on_both[n] if m.is_terminal(n) else g.on_cancel[n]
        else:
            target = g.on_exercise[n]
        memberships.append((n, holding_expr(n), target, None))
    for n in rebalanced:
        memberships.append((n, holding_expr(n), None, var_of_node[n]))

    beta_base = {}
    for idx in range(len(memberships)):
        beta_base[idx] = nvar
        nvar += len(pairs)

    rows = []
    for idx, (n, holder, target, next_var) in enumerate(memberships):
        pi = m.rates[n]
        base = beta_base[idx]
        for comp in range(d):
            row = [ZERO] * nvar
            if holder[0] == "root":
                if comp == i:
                    row[0] = ONE
            else:
                row[holder[1] + comp] = ONE
            if next_var is not None:
                row[next_var + comp] -= 1
            offset = ZERO
            if target is not None:
                offset = rational(target[comp])
            for k, (a, b) in enumerate(pairs):
                if b == comp:
                    row[base + k] += 1
                if a == comp:
                    row[base + k] -= rational(pi[a][b])
            rows.append((tuple(row), offset, False))

    objective = [ZERO] * nvar
    objective[0] = ONE
    nonneg = [False] * nvar
    for idx in range(len(memberships)):
        base = beta_base[idx]
        for k in range(len(pairs)):
            nonneg[base + k] = True
    result = lp_solve(
        LinearProgram(tuple(objective), tuple(rows), tuple(nonneg))
    )
    if result.status == "unbounded":
        raise OracleError("hedging cost unbounded below: the model admits arbitrage")
    if result.status != "optimal":
        raise OracleError("hedging program unexpectedly infeasible")
    return result.value


@dataclass(frozen=True)
class OracleReport:
    value: Rational
    per_sigma: tuple  # (StoppingTime, value) in enumeration order

    def best(self) -> StoppingTime:
        for st, v in self.per_sigma:
            if v == self.value:
                return st
        raise AssertionError("no stopping time attains the reported value")


def ask_oracle(m: Model, g: GamePayoff, currency: int, limit: int = 100_000) -> OracleReport:
    """Minimum over all cancellation times of the per-time hedging LP."""
    per = []
    best = None
    for st in enumerate_stopping_times(m, limit):
        v = primal_lp_ask(m, g, st, currency)
        per.append((st, v))
        if best is None or v < best:
            best = v
    return OracleReport(best, tuple(per))


def bid_oracle(m: Model, g: GamePayoff, currency: int, limit: int = 100_000) -> OracleReport:
    """Buyer-side oracle through the seller problem of the flipped payoff."""
    report = ask_oracle(m, negate_payoff(g), currency, limit)
    return OracleReport(-report.value, tuple((st, -v) for st, v in report.per_sigma))


# ---------------------------------------------------------------------------
# the untruncated dual value (one-step scale)


def untruncated_dual_value(m: Model, g: GamePayoff, currency: int) -> Rational:
    """Value of the dual representation WITHOUT truncating the stopping mass
    or stopping the price process at cancellation.

    Exact maximisation over the explicit one-step parameterisation: requires
    a one-step tree whose terminal nodes are frictionless (their polar cones
    are rays), so the only free data are the initial price, the terminal
    probabilities and the time-zero stopping mass.  The maximum of the
    multiaffine objective is attained at extreme points of that region.
    """
    _require_tree(m)
    if m.horizon != 1 or m.d != 2:
        raise OracleError("untruncated dual evaluation is restricted to one-step two-currency trees")
    i = currency - 1
    root = m.root
    leaves = list(m.terminals())

    def normalised_ray(n):
        cn = m.cones(n)
        lines, rays = cn.cone.polar_data()
        gens = list(rays) + list(lines) + [tuple(-x for x in l) for l in lines]
        gens = [g_ for g_ in gens if g_[i] > 0]
        rays_norm = {tuple(rational(x, g_[i]) for x in g_) for g_ in gens}
        if len(rays_norm) != 1:
            raise OracleError("terminal nodes must be frictionless for this evaluation")
        return next(iter(rays_norm))

    s_leaf = {n: normalised_ray(n) for n in leaves}
    # normalised initial price interval in the non-numeraire coordinate
    cn = m.cones(root)
    lines, rays = cn.cone.polar_data()
    gens = list(rays) + list(lines) + [tuple(-x for x in l) for l in lines]
    gens = [g_ for g_ in gens if g_[i] > 0]
    other = 1 - i
    ratios = sorted(rational(g_[other], g_[i]) for g_ in gens)
    lo, hi = ratios[0], ratios[-1]

    def s_root(ratio):
        s = [ZERO, ZERO]
        s[i] = ONE
        s[other] = ratio
        return tuple(s)

    leaf_values = {n: s_leaf[n][other] for n in leaves}

    def probability_vertices(constrained):
        rows = []
        nl = len(leaves)
        for k in range(nl):
            row = [ZERO] * nl
            row[k] = ONE
            rows.append((tuple(row), ZERO, False))
        rows.append((tuple([ONE] * nl), ONE, True))
        if constrained:
            vals = tuple(leaf_values[n] for n in leaves)
            rows.append((vals, lo, False))
            rows.append((tuple(-v for v in vals), -hi, False))
        from .geometry import ConvexPolyhedron

        poly = ConvexPolyhedron.from_halfspaces(nl, [(n, o) for n, o, _e in _as_ineq(rows)])
        return [tuple(p) for p in poly.points]

    def _as_ineq(rows):
        out = []
        for normal, offset, eq in rows:
            out.append((normal, offset, False))
            if eq:
                out.append((tuple(-x for x in normal), -offset, False))
        return out

    def objective(sigma_t, chi0, s0, probs):
        if sigma_t == 0:
            now = chi0 * qdot(g.on_both[root], s0)
            later = ZERO
            for k, n in enumerate(leaves):
                later += probs[k] * qdot(g.on_cancel[root], s_leaf[n])
        else:
            now = chi0 * qdot(g.on_exercise[root], s0)
            later = ZERO
            for k, n in enumerate(leaves):
                later += probs[k] * qdot(g.on_both[n], s_leaf[n])
        return now + (1 - chi0) * later

    best_overall = None
    for sigma_t in (0, 1):
        best = None
        for chi0, constrained in ((ZERO, True), (ONE, False)):
            for ratio in (lo, hi):
                for probs in probability_vertices(constrained):
                    v = objective(sigma_t, chi0, s_root(ratio), probs)
                    if best is None or v > best:
                        best = v
        best_overall = best if best_overall is None else min(best_overall, best)
    return best_overall
