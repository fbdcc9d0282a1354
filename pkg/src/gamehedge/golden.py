"""Frozen reference values for the bundled example models and the two
lattice studies, used by ``--compare`` runs and the acceptance suite."""

from __future__ import annotations

from .rational import rational

Q = rational

# two-step toy model: exact prices per currency
EXAMPLE1_ASK = (Q(2, 5), Q(4))
EXAMPLE1_BID = (Q(11, 50), Q(11, 5))

# one-step counterexample model
EXAMPLE2_ASK_1 = Q(-2)
EXAMPLE2_LP_BY_TIME = {0: Q(-2), 1: Q(0)}
EXAMPLE2_UNTRUNCATED_DUAL = Q(-3)

# strike study: ten-step lattice, penalty 5; (bid, ask) per cost level
TABLE1_STRIKES = (100, 95, 90, 85, 80)
TABLE1 = {
    "0": {
        100: ("10.043290", "11.033942"),
        95: ("5.266479", "6.817389"),
        90: ("0.967824", "2.774598"),
        85: ("-2.934360", "-1.091048"),
        80: ("-6.910514", "-5.131149"),
    },
    "0.005": {
        100: ("9.568590", "11.687749"),
        95: ("4.706543", "7.480028"),
        90: ("0.367975", "3.423798"),
        85: ("-3.587214", "-0.444708"),
        80: ("-7.584034", "-4.614029"),
    },
}

# penalty study: ten-step lattice, strike 100; rows end with the
# no-cancellation (American) comparison
TABLE2_PENALTIES = (0, 1, 2, 5, 10, 20)
TABLE2 = {
    "0": {
        0: ("10.000000", "10.000000"),
        1: ("10.014709", "10.278348"),
        2: ("10.027095", "10.497310"),
        5: ("10.043290", "11.033942"),
        10: ("10.050958", "11.571315"),
        20: ("10.052026", "11.796921"),
        "american": ("10.052027", "11.812658"),
    },
    "0.005": {
        0: ("9.550000", "10.447761"),
        1: ("9.556726", "10.790910"),
        2: ("9.562075", "11.051351"),
        5: ("9.568590", "11.687749"),
        10: ("9.571850", "12.297913"),
        20: ("9.572414", "12.575621"),
        "american": ("9.572414", "12.589930"),
    },
}

LATTICE_STEPS = 10
LATTICE_S0 = (40, 50)
LATTICE_SIGMA = (0.15, 0.1)
LATTICE_RHO = 0.5
