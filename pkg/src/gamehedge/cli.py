"""Command-line front end: pricing, hedging, verification and table runs.

Exit codes: 0 success, 1 verification/table mismatch, 2 parse error,
3 payoff validation failure, 4 piece cap exceeded, 5 arbitrage escalated
by --strict.
"""

from __future__ import annotations

import argparse
import importlib.resources as resources
import os
import random
import sys

from . import golden
from .duality import ask_oracle, bid_oracle, untruncated_dual_value
from .market import (
    KornMullerParams,
    ModelError,
    build_korn_muller,
    check_no_arbitrage,
    load_model,
    unfold,
)
from .options import GamePayoff, PayoffError, basket_put, load_payoff, negate_payoff
from .pricing import (
    PayoffInvalid,
    PieceCapExceeded,
    american_sets,
    ask_price,
    bid_price,
    buyer_sets,
    buyer_strategy,
    dump_sets,
    seller_sets,
    seller_strategy,
    simulate,
)
from .rational import format_decimal, format_exact, rational

EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_PAYOFF = 3
EXIT_PIECES = 4
EXIT_ARBITRAGE = 5

_BUNDLED = ("example1", "example2")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _bundled_text(name):
    return resources.files("gamehedge").joinpath("data", name).read_text()


def _resolve_model(args):
    if args.korn_muller:
        try:
            parts = args.korn_muller.split(",")
            steps, s1, s2, sig1, sig2, rho, k = parts
            params = KornMullerParams(
                steps=int(steps),
                s0=(rational(s1), rational(s2)),
                sigma1=float(sig1),
                sigma2=float(sig2),
                rho=float(rho),
                cost=rational(k),
            )
        except (ValueError, ModelError) as exc:
            raise CliError(f"bad --korn-muller parameters: {exc}", EXIT_PARSE)
        return build_korn_muller(params), True
    if not args.model:
        raise CliError("a model is required (--model or --korn-muller)", EXIT_PARSE)
    try:
        if args.model in _BUNDLED:
            return load_model(_bundled_text(f"{args.model}.model.json")), False
        return load_model(args.model), False
    except (ModelError, OSError) as exc:
        raise CliError(f"cannot load model: {exc}", EXIT_PARSE)


def _resolve_option(args, m, is_km):
    if args.basket_put:
        try:
            strike, penalty = args.basket_put.split(",")
            return basket_put(m, rational(strike), rational(penalty))
        except (ValueError, PayoffError) as exc:
            raise CliError(f"bad --basket-put parameters: {exc}", EXIT_PARSE)
    if args.option:
        try:
            return load_payoff(args.option, m)
        except PayoffError as exc:
            raise CliError(f"cannot load option: {exc}", EXIT_PARSE)
        except OSError as exc:
            raise CliError(f"cannot read option file: {exc}", EXIT_PARSE)
    if args.model in _BUNDLED:
        return load_payoff(_bundled_text(f"{args.model}.option.json"), m)
    raise CliError("an option is required (--option or --basket-put)", EXIT_PARSE)


def _arbitrage_note(m, strict, out):
    if len(m) > 400:
        return None
    report = check_no_arbitrage(m)
    if report.degenerate_nodes:
        out(f"note: frictionless legs at nodes {', '.join(report.degenerate_nodes)}")
    if not report.arbitrage_free:
        out("warning: model admits arbitrage")
        if strict:
            raise CliError("arbitrage detected under --strict", EXIT_ARBITRAGE)
    return report.arbitrage_free


def _currencies(args, m):
    if args.currency:
        if not 1 <= args.currency <= m.d:
            raise CliError(f"currency must be in 1..{m.d}", EXIT_PARSE)
        return [args.currency]
    return list(range(1, m.d + 1))


def _fmt_price(v):
    if isinstance(v, float):
        return "unbounded" if v < 0 else "empty"
    return f"{format_exact(v)} ({format_decimal(v)})"


def cmd_price(args):
    m, is_km = _resolve_model(args)
    g = _resolve_option(args, m, is_km)
    _arbitrage_note(m, args.strict, lambda s: print(s, file=sys.stderr))
    try:
        if args.american:
            fam_ask = american_sets(m, g, "seller", args.piece_cap)
            fam_bid = american_sets(m, g, "buyer", args.piece_cap)
        else:
            fam_ask = seller_sets(m, g, args.piece_cap)
            fam_bid = buyer_sets(m, g, args.piece_cap)
    except PayoffInvalid as exc:
        raise CliError(f"invalid payoff: {exc}", EXIT_PAYOFF)
    except PieceCapExceeded as exc:
        raise CliError(str(exc), EXIT_PIECES)
    rows = []
    for i in _currencies(args, m):
        rows.append((i, bid_price(fam_bid, i), ask_price(fam_ask, i)))
    if args.format == "csv":
        print("currency,bid,ask,bid_exact,ask_exact")
        for i, bid, ask in rows:
            print(
                f"{i},{format_decimal(bid)},{format_decimal(ask)},"
                f"{format_exact(bid)},{format_exact(ask)}"
            )
    else:
        print(f"{'currency':>8} {'bid':>24} {'ask':>24}")
        for i, bid, ask in rows:
            print(f"{i:>8} {_fmt_price(bid):>24} {_fmt_price(ask):>24}")
    if args.dump_sets:
        with open(args.dump_sets, "w", encoding="utf-8") as fh:
            fh.write(dump_sets(fam_ask))
            fh.write(dump_sets(fam_bid))
    return 0


def _find_scenario(tree, base, m, text):
    parts = [p for p in text.split("/") if p]
    paths = []

    def walk(n, acc):
        acc = acc + [n]
        if not tree.succ[n]:
            paths.append(acc)
        for c in tree.succ[n]:
            walk(c, acc)

    walk(tree.root, [])
    matches = []
    for path in paths:
        labels = [m.labels[base[n]] for n in path]
        if len(parts) == 1:
            if labels[-1] == parts[0]:
                matches.append(path)
        elif labels[-len(parts):] == parts or labels == parts:
            matches.append(path)
    if not matches:
        raise CliError(f"scenario {text!r} not found", EXIT_PARSE)
    return matches[0]


def cmd_hedge(args):
    m, is_km = _resolve_model(args)
    g = _resolve_option(args, m, is_km)
    if args.currency and not 1 <= args.currency <= m.d:
        raise CliError(f"currency must be in 1..{m.d}", EXIT_PARSE)
    try:
        if args.side == "seller":
            fam = seller_sets(m, g, args.piece_cap)
            strategy = seller_strategy(fam, args.currency or 1)
        else:
            fam = buyer_sets(m, g, args.piece_cap)
            strategy = buyer_strategy(fam, args.currency or 1)
    except PayoffInvalid as exc:
        raise CliError(f"invalid payoff: {exc}", EXIT_PAYOFF)
    except PieceCapExceeded as exc:
        raise CliError(str(exc), EXIT_PIECES)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE)
    tree = strategy.tree
    print(f"side: {strategy.side}  currency: {strategy.currency}  "
          f"price: {_fmt_price(strategy.price if strategy.side == 'seller' else -strategy.price)}")
    for t in range(tree.horizon + 1):
        for n in tree.levels[t]:
            y = strategy.holdings[n]
            mark = "stop" if n in strategy.stop_nodes else "    "
            vec = "(" + ", ".join(format_exact(x) for x in y) + ")"
            print(f"t={t} {tree.labels[n]:>16} {mark} holds {vec}")
    if args.scenario:
        path = _find_scenario(tree, strategy.base, m, args.scenario)
        stop = args.counterparty_stop if args.counterparty_stop is not None else tree.horizon
        report = simulate(strategy, g, path, stop)
        print(report)
        return 0 if report.solvent else EXIT_MISMATCH
    return 0


def _lift_payoff(m, g, tree, base):
    lift = lambda vs: tuple(vs[base[n]] for n in range(len(tree)))
    return GamePayoff(lift(g.on_exercise), lift(g.on_cancel), lift(g.on_both))


def cmd_verify(args):
    failures = 0
    if args.counterexample:
        m = load_model(_bundled_text("example2.model.json"))
        g = load_payoff(_bundled_text("example2.option.json"), m)
        fam = seller_sets(m, g)
        construction = ask_price(fam, 1)
        oracle = ask_oracle(m, g, 1)
        naive = untruncated_dual_value(m, g, 1)
        print(f"construction ask: {format_exact(construction)}")
        for st, v in oracle.per_sigma:
            t = min(m.times[n] for n in st.stop_nodes)
            print(f"  committed stop at t={t}: hedging cost {format_exact(v)}")
        print(f"oracle ask: {format_exact(oracle.value)}")
        print(f"untruncated dual value: {format_exact(naive)}")
        if construction != oracle.value:
            print("MISMATCH: construction vs oracle")
            failures += 1
        if naive != construction:
            print("representations differ (expected): truncation matters")
        else:
            print("MISMATCH: untruncated dual unexpectedly agrees")
            failures += 1
    models = []
    if args.random:
        from .randgen import random_arbitrage_free_model, random_game_payoff

        rng = random.Random(args.seed)
        for _ in range(args.random):
            m = random_arbitrage_free_model(rng, steps=rng.choice([1, 2, 2, 3]))
            g = random_game_payoff(rng, m)
            models.append((m, g, None))
    if args.model or args.korn_muller:
        m, _ = _resolve_model(args)
        g = _resolve_option(args, m, False)
        models.append((m, g, args.model))
    matched = 0
    verbose = bool(args.model or args.korn_muller)
    for idx, (m, g, name) in enumerate(models):
        tree, base = (m, tuple(range(len(m)))) if m.mode == "tree" else unfold(m)
        g_tree = _lift_payoff(m, g, tree, base)
        fam = seller_sets(m, g)
        fam_b = buyer_sets(m, g)
        ok = True
        for i in _currencies(args, m):
            construction = ask_price(fam, i)
            oracle = ask_oracle(tree, g_tree, i, args.enumeration_limit)
            if verbose:
                print(f"model {name or idx}, currency {i}:")
                for st, v in oracle.per_sigma:
                    nodes = ",".join(sorted(tree.labels[n] for n in st.stop_nodes))
                    print(f"  stop at [{nodes}]: {format_exact(v)}")
                best = oracle.best()
                nodes = ",".join(sorted(tree.labels[n] for n in best.stop_nodes))
                print(f"  winning stop [{nodes}] -> oracle {format_exact(oracle.value)}, "
                      f"construction {format_exact(construction)}, "
                      f"match {construction == oracle.value}")
            if construction != oracle.value:
                print(f"model {name or idx}: currency {i} ask mismatch "
                      f"{format_exact(construction)} vs {format_exact(oracle.value)}")
                ok = False
            bid_c = bid_price(fam_b, i)
            bid_o = bid_oracle(tree, g_tree, i, args.enumeration_limit)
            if bid_c != bid_o.value:
                print(f"model {name or idx}: currency {i} bid mismatch")
                ok = False
            flipped = ask_price(seller_sets(m, negate_payoff(g)), i)
            if bid_c != -flipped:
                print(f"model {name or idx}: currency {i} symmetry identity fails")
                ok = False
        if ok:
            matched += 1
        else:
            failures += 1
    if models:
        print(f"{matched}/{len(models)} models match the oracle exactly")
    return EXIT_MISMATCH if failures else 0


def _table_cells(table):
    if table == 1:
        for cost in ("0", "0.005"):
            for strike in golden.TABLE1_STRIKES:
                yield cost, strike, 5, False
    else:
        for cost in ("0", "0.005"):
            for penalty in golden.TABLE2_PENALTIES:
                yield cost, 100, penalty, False
            yield cost, 100, 0, True


_LATTICE_CACHE: dict = {}


def _study_lattice(steps, cost):
    key = (steps, str(cost))
    m = _LATTICE_CACHE.get(key)
    if m is None:
        params = KornMullerParams(
            steps=steps,
            s0=golden.LATTICE_S0,
            sigma1=golden.LATTICE_SIGMA[0],
            sigma2=golden.LATTICE_SIGMA[1],
            rho=golden.LATTICE_RHO,
            cost=rational(cost),
        )
        m = build_korn_muller(params)
        if len(_LATTICE_CACHE) < 8:
            _LATTICE_CACHE[key] = m
    return m


def _price_cell(job):
    steps, cost, strike, penalty, american, piece_cap = job
    m = _study_lattice(steps, cost)
    g = basket_put(m, strike, penalty)
    if american:
        bid = bid_price(american_sets(m, g, "buyer", piece_cap), 3)
        ask = ask_price(american_sets(m, g, "seller", piece_cap), 3)
    else:
        bid = bid_price(buyer_sets(m, g, piece_cap), 3)
        ask = ask_price(seller_sets(m, g, piece_cap), 3)
    return format_decimal(bid), format_decimal(ask)


def run_table(table, steps=None, piece_cap=512, workers=None):
    """Compute all cells of one study; returns rows of decimal strings."""
    steps = steps or golden.LATTICE_STEPS
    cells = list(_table_cells(table))
    jobs = [
        (steps, cost, strike, penalty, american, piece_cap)
        for cost, strike, penalty, american in cells
    ]
    workers = workers if workers is not None else int(os.environ.get("GAMEHEDGE_THREADS", "1"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_price_cell, jobs, chunksize=1))
    else:
        results = [_price_cell(job) for job in jobs]
    return cells, results


def cmd_tables(args):
    cells, results = run_table(
        args.table, steps=args.steps, piece_cap=args.piece_cap
    )
    reference = golden.TABLE1 if args.table == 1 else golden.TABLE2
    key_name = "K" if args.table == 1 else "p"
    print(f"cost,{key_name},bid,ask" + (",bid_ref,ask_ref" if args.compare else ""))
    worst = 0.0
    bad = False
    for (cost, strike, penalty, american), (bid, ask) in zip(cells, results):
        key = strike if args.table == 1 else ("american" if american else penalty)
        row = f"{cost},{key},{bid},{ask}"
        if args.compare:
            ref_bid, ref_ask = reference[cost][key]
            dev = max(abs(float(bid) - float(ref_bid)), abs(float(ask) - float(ref_ask)))
            worst = max(worst, dev)
            if dev > args.tolerance:
                bad = True
            row += f",{ref_bid},{ref_ask}"
        print(row)
    if args.compare:
        print(f"# max abs deviation {worst:.2e} (tolerance {args.tolerance:g})")
        if bad:
            return EXIT_MISMATCH
    return 0


def cmd_examples(args):
    for name in _BUNDLED:
        m = load_model(_bundled_text(f"{name}.model.json"))
        g = load_payoff(_bundled_text(f"{name}.option.json"), m)
        fam = seller_sets(m, g)
        fam_b = buyer_sets(m, g)
        asks = ", ".join(_fmt_price(ask_price(fam, i)) for i in range(1, m.d + 1))
        bids = ", ".join(_fmt_price(bid_price(fam_b, i)) for i in range(1, m.d + 1))
        print(f"{name}: ask per currency [{asks}]  bid per currency [{bids}]")
    follow_up = argparse.Namespace(
        counterexample=True,
        random=0,
        seed=0,
        model=None,
        korn_muller=None,
        option=None,
        basket_put=None,
        currency=None,
        enumeration_limit=100_000,
    )
    return cmd_verify(follow_up)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gamehedge",
        description="Exact pricing and hedging of game options under proportional transaction costs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", help=f"model file or one of {', '.join(_BUNDLED)}")
        p.add_argument(
            "--korn-muller",
            metavar="T,S1,S2,sigma1,sigma2,rho,k",
            help="build the two-asset recombinant lattice inline",
        )
        p.add_argument("--option", help="option payoff file")
        p.add_argument("--basket-put", metavar="K,p", help="basket put strike and penalty")
        p.add_argument("--currency", type=int, help="1-based currency index")
        p.add_argument("--piece-cap", type=int, default=512)
        p.add_argument("--strict", action="store_true", help="escalate arbitrage warnings")

    p = sub.add_parser("price", help="bid and ask prices")
    common(p)
    p.add_argument("--american", action="store_true", help="no-cancellation variant")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--dump-sets", metavar="FILE", help="write exact hedge-set H-reps")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("hedge", help="optimal hedging strategy")
    common(p)
    p.add_argument("--side", choices=("seller", "buyer"), default="seller")
    p.add_argument("--scenario", help="path of node labels, e.g. uu or u/uu")
    p.add_argument(
        "--counterparty-stop", type=int, help="counterparty stopping time for --scenario"
    )
    p.set_defaults(func=cmd_hedge)

    p = sub.add_parser("verify", help="check construction prices against the LP oracle")
    common(p)
    p.add_argument("--random", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counterexample", action="store_true")
    p.add_argument("--enumeration-limit", type=int, default=100_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", help="reproduce the lattice studies")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--compare", action="store_true")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--steps", type=int, help="override the lattice step count")
    p.add_argument("--piece-cap", type=int, default=512)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("examples", help="price the bundled examples and run the counterexample")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PieceCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIECES


if __name__ == "__main__":
    sys.exit(main())
