"""Multi-currency market models: event trees, recombinant lattices, solvency
cones and the consistent-price-system arbitrage check.

A model is a levelled DAG of nodes, each carrying an exchange-rate matrix
``pi[i][j]`` (units of currency i per unit of currency j, ones on the
diagonal).  Trees give every node a unique predecessor; lattices allow
merging, keyed for the two-asset recombinant lattice by factor counts.  All
rates are exact rationals; irrational lattice factors are rounded to 15
significant decimal digits on ingestion and exact thereafter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .geometry import ConvexPolyhedron, PolyCone, polar_cone
from .rational import (
    ONE,
    Rational,
    format_exact,
    qvec,
    rational,
    rational_from_significand,
)


class ModelError(ValueError):
    """Malformed model description."""


@dataclass(frozen=True)
class NodeCones:
    """Solvency cone data attached to one node."""

    cone: PolyCone  # solvent portfolios
    polar: PolyCone  # consistent price directions
    poly: ConvexPolyhedron  # the cone as a polyhedron (vertex at the origin)
    neg_poly: ConvexPolyhedron  # its reflection, used for rebalancing sets
    degenerate: bool  # polar not full-dimensional (frictionless leg)


def solvency_cone(rates) -> PolyCone:
    """Cone generated by the canonical basis and ``pi[i][j]·e_i − e_j``."""
    d = len(rates)
    gens = []
    for i in range(d):
        gens.append(tuple(ONE if j == i else 0 for j in range(d)))
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            rate = rational(rates[i][j])
            if rate <= 0:
                raise ModelError("exchange rates must be positive")
            gen = [rational(0)] * d
            gen[i] = rate
            gen[j] = gen[j] - 1
            gens.append(tuple(gen))
    return PolyCone(d, gens)


def _node_cones(rates) -> NodeCones:
    cone = solvency_cone(rates)
    polar = polar_cone(cone)
    lines, rays = cone.polar_data()
    d = cone.dim
    span = _rank([tuple(x) for x in (list(lines) + list(rays))])
    poly = cone.as_polyhedron()
    neg_rows = [tuple(-a for a in row) + (0,) for row in cone.hrep_rows]
    neg_poly = ConvexPolyhedron.from_int_rows(d, neg_rows)
    return NodeCones(cone, polar, poly, neg_poly, degenerate=span < d)


def _rank(vectors) -> int:
    from fractions import Fraction

    rows = [[Fraction(x) for x in v] for v in vectors]
    rank = 0
    cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        rank += 1
    return rank


class Model:
    """Immutable levelled market model."""

    def __init__(self, d, mode, labels, times, succ, rates, meta=None):
        self.d = d
        self.mode = mode
        self.labels = tuple(labels)
        self.times = tuple(times)
        self.succ = tuple(tuple(s) for s in succ)
        self.rates = tuple(rates)
        self.meta = dict(meta or {})
        self.horizon = max(times) if times else 0
        self.levels = [[] for _ in range(self.horizon + 1)]
        for n, t in enumerate(times):
            self.levels[t].append(n)
        pred = [[] for _ in self.labels]
        for n, children in enumerate(self.succ):
            for c in children:
                pred[c].append(n)
        self.pred = tuple(tuple(p) for p in pred)
        self.root = self.levels[0][0]
        self._cones: dict = {}
        self._index = {label: n for n, label in enumerate(self.labels)}

    # -- queries -------------------------------------------------------------

    def __len__(self):
        return len(self.labels)

    def node(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ModelError(f"unknown node {label!r}") from None

    def terminals(self):
        return self.levels[self.horizon]

    def is_terminal(self, n) -> bool:
        return self.times[n] == self.horizon

    def cones(self, n) -> NodeCones:
        key = self.rates[n]
        cached = self._cones.get(key)
        if cached is None:
            cached = _node_cones(key)
            self._cones[key] = cached
        return cached

    def degenerate_nodes(self):
        """Labels of nodes whose polar cone is not full-dimensional."""
        return [self.labels[n] for n in range(len(self)) if self.cones(n).degenerate]


# ---------------------------------------------------------------------------
# construction and ingestion


def _validate_rate_matrix(matrix, d, label):
    if len(matrix) != d or any(len(row) != d for row in matrix):
        raise ModelError(f"node {label}: rates must be a {d}x{d} matrix")
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            q = rational(matrix[i][j])
            if i == j and q != 1:
                raise ModelError(f"node {label}: self-exchange rate must be one")
            if q <= 0:
                raise ModelError(f"node {label}: nonpositive rate")
            row.append(q)
        out.append(tuple(row))
    return tuple(out)


def build_tree(spec: dict) -> Model:
    """Build a Model from the structured description.

    Expected fields: ``currencies``, ``mode`` (``tree`` or ``lattice``) and
    ``nodes``, a list of ``{id, time, successors, rates}`` where rates are
    given as numbers or exact strings (``"0.5"``, ``"5/3"``).
    """
    try:
        d = int(spec["currencies"])
        mode = spec["mode"]
        nodes = spec["nodes"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"missing model field: {exc}") from None
    if mode not in ("tree", "lattice"):
        raise ModelError(f"unknown mode {mode!r}")
    if d < 1 or not nodes:
        raise ModelError("need at least one currency and one node")

    labels = []
    times = []
    rates = []
    succ_labels = []
    for entry in nodes:
        try:
            labels.append(str(entry["id"]))
            times.append(int(entry["time"]))
            succ_labels.append([str(s) for s in entry.get("successors", [])])
            rates.append(_validate_rate_matrix(entry["rates"], d, entry["id"]))
        except KeyError as exc:
            raise ModelError(f"node entry missing field {exc}") from None
    if len(set(labels)) != len(labels):
        raise ModelError("duplicate node ids")
    index = {label: n for n, label in enumerate(labels)}
    succ = []
    for n, children in enumerate(succ_labels):
        out = []
        for child in children:
            if child not in index:
                raise ModelError(f"node {labels[n]}: unknown successor {child}")
            c = index[child]
            if times[c] != times[n] + 1:
                raise ModelError(f"node {labels[n]}: successor {child} not one step later")
            out.append(c)
        succ.append(out)

    horizon = max(times)
    roots = [n for n, t in enumerate(times) if t == 0]
    if len(roots) != 1:
        raise ModelError("exactly one time-zero node required")
    npred = [0] * len(labels)
    for n, children in enumerate(succ):
        if times[n] < horizon and not children:
            raise ModelError(f"node {labels[n]}: interior node without successors")
        if times[n] == horizon and children:
            raise ModelError(f"node {labels[n]}: terminal node with successors")
        for c in children:
            npred[c] += 1
    for n in range(len(labels)):
        if times[n] > 0 and npred[n] == 0:
            raise ModelError(f"node {labels[n]}: unreachable")
        if mode == "tree" and npred[n] > 1:
            raise ModelError(f"node {labels[n]}: multiple predecessors in tree mode")
    return Model(d, mode, labels, times, succ, rates)


@dataclass(frozen=True)
class KornMullerParams:
    """Two-asset recombinant lattice with a cash leg and uniform friction."""

    steps: int
    s0: tuple
    sigma1: float
    sigma2: float
    rho: float
    cost: Rational

    def __post_init__(self):
        if self.steps < 1:
            raise ModelError("steps must be positive")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ModelError("volatilities must be positive")
        if abs(self.rho) > 1:
            raise ModelError("correlation must lie in [-1, 1]")
        k = rational(self.cost)
        if k < 0 or k >= 1:
            raise ModelError("proportional cost must lie in [0, 1)")


def korn_muller_factors(params: KornMullerParams):
    """The four i.i.d. joint return factors, as exact rationals.

    Both assets move by exponential factors; the second asset's exponent mixes
    the common and independent Gaussian directions through the correlation
    (Cholesky form).  Values are fixed at 15 significant decimal digits.
    """
    dt = 1.0 / params.steps
    sq = math.sqrt(dt)
    a = 0.5 * params.sigma1**2 * dt
    b = params.sigma1 * sq
    c = 0.5 * params.sigma2**2 * dt
    s = params.sigma2 * sq
    w = math.sqrt(1.0 - params.rho**2)
    pairs = [
        (math.exp(-a - b), math.exp(-c - (params.rho + w) * s)),
        (math.exp(-a - b), math.exp(-c - (params.rho - w) * s)),
        (math.exp(-a + b), math.exp(-c + (params.rho - w) * s)),
        (math.exp(-a + b), math.exp(-c + (params.rho + w) * s)),
    ]
    return tuple(
        (rational_from_significand(x), rational_from_significand(y)) for x, y in pairs
    )


def build_korn_muller(params: KornMullerParams) -> Model:
    """Recombinant three-currency lattice over ``steps`` periods plus one
    settlement step with frozen rates (so "never act" is expressible)."""
    factors = korn_muller_factors(params)
    k = rational(params.cost)
    s1_0, s2_0 = rational(params.s0[0]), rational(params.s0[1])
    if s1_0 <= 0 or s2_0 <= 0:
        raise ModelError("initial prices must be positive")
    one_plus_k = 1 + k

    labels, times, rates, succ = [], [], [], []
    index = {}
    prices = []

    def rate_matrix(s1, s2):
        s = (s1, s2, ONE)
        out = []
        for i in range(3):
            row = []
            for j in range(3):
                row.append(ONE if i == j else (s[j] / s[i]) * one_plus_k)
            out.append(tuple(row))
        return tuple(out)

    def key_label(t, key):
        return f"t{t}:" + ",".join(str(c) for c in key)

    def add_node(t, key, s1, s2):
        label = key_label(t, key)
        index[(t, key)] = len(labels)
        labels.append(label)
        times.append(t)
        rates.append(rate_matrix(s1, s2))
        prices.append((s1, s2, ONE))
        succ.append([])
        return index[(t, key)]

    level = {(0, 0, 0, 0): (s1_0, s2_0)}
    add_node(0, (0, 0, 0, 0), s1_0, s2_0)
    for t in range(params.steps):
        nxt = {}
        for key, (s1, s2) in level.items():
            n = index[(t, key)]
            for f, (f1, f2) in enumerate(factors):
                child = list(key)
                child[f] += 1
                child = tuple(child)
                if child not in nxt:
                    nxt[child] = (s1 * f1, s2 * f2)
                    add_node(t + 1, child, *nxt[child])
                succ[n].append(index[(t + 1, child)])
        level = nxt
    # settlement step: same rates, single successor each
    for key, (s1, s2) in level.items():
        n = index[(params.steps, key)]
        child = add_node(params.steps + 1, key + ("x",), s1, s2)
        succ[n].append(child)

    meta = {
        "kind": "korn_muller",
        "params": params,
        "prices": tuple(prices),
        "settlement_step": True,
    }
    return Model(3, "lattice", labels, times, succ, rates, meta)


# ---------------------------------------------------------------------------
# file ingestion / round trip


def load_model(source) -> Model:
    """Build a model from a dict, JSON text, or a path to a JSON file."""
    if isinstance(source, Model):
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
            raise ModelError(f"model file is not valid JSON: {exc}") from None
    if spec.get("mode") == "korn_muller":
        params = KornMullerParams(
            steps=int(spec["T"]),
            s0=(rational(spec["S0"][0]), rational(spec["S0"][1])),
            sigma1=float(spec["sigma1"]),
            sigma2=float(spec["sigma2"]),
            rho=float(spec["rho"]),
            cost=rational(spec["k"]),
        )
        return build_korn_muller(params)
    return build_tree(spec)


def model_to_spec(m: Model) -> dict:
    """Dump to the ingestible description with exact rational strings."""
    nodes = []
    for n in range(len(m)):
        nodes.append(
            {
                "id": m.labels[n],
                "time": m.times[n],
                "successors": [m.labels[c] for c in m.succ[n]],
                "rates": [[format_exact(x) for x in row] for row in m.rates[n]],
            }
        )
    return {"currencies": m.d, "mode": m.mode, "nodes": nodes}


# ---------------------------------------------------------------------------
# path tree (unfolding a lattice)


def unfold(m: Model, max_nodes: int = 200_000):
    """Unfold a levelled DAG into its path tree.

    Returns ``(tree, base)`` where ``base[n]`` maps tree nodes to nodes of the
    original model.  On trees this is an isomorphic copy.
    """
    labels, times, succ, rates, base = [], [], [], [], []

    def add(node, label):
        idx = len(labels)
        labels.append(label)
        times.append(m.times[node])
        rates.append(m.rates[node])
        base.append(node)
        succ.append([])
        return idx

    root = add(m.root, m.labels[m.root])
    stack = [(m.root, root)]
    while stack:
        node, tnode = stack.pop()
        for child in m.succ[node]:
            if len(labels) >= max_nodes:
                raise ModelError("path tree too large to unfold")
            label = m.labels[child] if m.mode == "tree" else f"{labels[tnode]}/{m.labels[child]}"
            tchild = add(child, label)
            succ[tnode].append(tchild)
            stack.append((child, tchild))
    tree = Model(m.d, "tree", labels, times, succ, rates, {"unfolded_from": m.meta.get("kind")})
    return tree, tuple(base)


# ---------------------------------------------------------------------------
# arbitrage check (consistent price systems)


@dataclass(frozen=True)
class ConsistentPriceWitness:
    """Unnormalised consistent price vectors, indexed by node label."""

    prices: dict

    def vector(self, label):
        return self.prices[label]


@dataclass(frozen=True)
class NoArbitrageReport:
    arbitrage_free: bool
    witness: ConsistentPriceWitness | None
    degenerate_nodes: tuple


def check_no_arbitrage(m: Model, max_nodes: int = 400) -> NoArbitrageReport:
    """Feasibility of a consistent pricing process.

    Variables are one nonnegative price vector per node, constrained to the
    polar cone at that node, aggregating over successors, with terminal
    component sums at least one.  Feasible iff the model is arbitrage-free;
    the solution is a strictly positive witness.
    """
    from .linprog import LinearProgram, lp_solve
    from .rational import ZERO

    if len(m) > max_nodes:
        raise ModelError(
            f"arbitrage check limited to {max_nodes} nodes ({len(m)} present)"
        )
    d = m.d
    nvar = d * len(m)
    rows = []

    def unit(n, j, coef):
        row = [ZERO] * nvar
        row[n * d + j] = coef
        return row

    for n in range(len(m)):
        pi = m.rates[n]
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                row = [ZERO] * nvar
                row[n * d + i] = pi[i][j]
                row[n * d + j] = row[n * d + j] - 1
                rows.append((tuple(row), ZERO, False))
        if not m.is_terminal(n):
            for j in range(d):
                row = [ZERO] * nvar
                row[n * d + j] = ONE
                for c in m.succ[n]:
                    row[c * d + j] = row[c * d + j] - 1
                rows.append((tuple(row), ZERO, True))
        else:
            row = [ZERO] * nvar
            for j in range(d):
                row[n * d + j] = ONE
            rows.append((tuple(row), ONE, False))

    lp = LinearProgram(
        objective=tuple([ZERO] * nvar),
        rows=tuple(rows),
        nonneg=tuple([True] * nvar),
    )
    result = lp_solve(lp)
    degenerate = tuple(m.degenerate_nodes())
    if result.status != "optimal":
        return NoArbitrageReport(False, None, degenerate)
    prices = {
        m.labels[n]: qvec(result.point[n * d : (n + 1) * d]) for n in range(len(m))
    }
    return NoArbitrageReport(True, ConsistentPriceWitness(prices), degenerate)
