"""Exact-arithmetic pricing and hedging of game options under proportional
transaction costs in multi-currency (Kabanov-style) discrete-time markets.

The package prices game (Israeli) options by a polyhedral set-valued
backward recursion over event trees and recombinant lattices, extracts
optimal cancellation/exercise strategies, and independently verifies prices
through an exact linear-programming oracle over enumerated stopping times.
All arithmetic is exact rational.
"""

from .duality import (
    ApproxPair,
    RandomisedStoppingTime,
    StoppingTime,
    ask_oracle,
    bid_oracle,
    check_approx_pair,
    dual_objective,
    enumerate_stopping_times,
    primal_lp_ask,
    truncate,
    untruncated_dual_value,
)
from .geometry import (
    ConvexPolyhedron,
    Halfspace,
    PolyCone,
    PolyhedralUnion,
    add_cone,
    halfspace,
    intersect,
    min_coordinate,
    polar_cone,
    prune,
    union_intersect,
    union_union,
)
from .linprog import LinearConstraint, LinearProgram, LPResult, lp_solve
from .market import (
    ConsistentPriceWitness,
    KornMullerParams,
    Model,
    ModelError,
    build_korn_muller,
    build_tree,
    check_no_arbitrage,
    load_model,
    model_to_spec,
    solvency_cone,
    unfold,
)
from .options import (
    GamePayoff,
    PayoffError,
    basket_put,
    load_payoff,
    negate_payoff,
    validate_game_payoff,
    zero_payoff,
)
from .pricing import (
    HedgingStrategy,
    PieceCapExceeded,
    SetFamily,
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
from .rational import Rational, format_decimal, format_exact, qvec, rational

__version__ = "0.1.0"
