"""Built-in chain tables for the partition-hierarchy algorithm families.

Each chain is a per-set parameter formula in the variables ``b``, ``gA2``,
``gA3`` (level-set size ratios) and the derived ``gC2``, ``gC3``; every
formula is implicitly truncated to [0, 1].  Set keys follow the partition
order A_1..A_m, B_1..B_m, C_1..C_m.
"""

from __future__ import annotations

from functools import lru_cache

from .exprs import clamp01, parse, reduce_ratio


def set_names(m: int) -> list:
    return ([f"A{t}" for t in range(1, m + 1)]
            + [f"B{t}" for t in range(1, m + 1)]
            + [f"C{t}" for t in range(1, m + 1)])


# m = 1: the five conditionally-valid single-level algorithms.
TABLE_M1 = [
    ("0", "1", "b"),
    ("1", "0", "b"),
    ("1", "1", "b - gA1"),
    ("b / gA1", "1", "0"),
    ("1", "b / gA1", "0"),
]

# m = 2: the ten-chain family (parameters pA1, pA2, pB1, pB2, pC1, pC2).
TABLE_M2 = [
    ("1", "1", "0", "0", "(b - gC2) / (1 - gC2)", "b / gC2"),
    ("0", "0", "1", "1", "(b - gC2) / (1 - gC2)", "b / gC2"),
    ("1", "1", "0", "0", "b / (1 - gC2)", "(b + gC2 - 1) / gC2"),
    ("0", "1", "1", "0", "b / (1 - gC2)", "(b + gC2 - 1) / gC2"),
    ("0", "0", "1", "1", "b / (1 - gC2)", "(b + gC2 - 1) / gC2"),
    ("1", "1", "0", "b / gA2", "(b - gA2) / (1 - gC2)", "0"),
    ("0", "1", "1", "b / gA2", "(b - gA2) / (1 - gC2)", "0"),
    ("0", "b / gA2", "1", "1", "(b - gA2 - gC2) / (1 - gC2)", "(b - gA2) / gC2"),
    ("0", "0", "1", "(b + gA2 - 1) / gA2", "(b + gA2 - gC2) / (1 - gC2)",
     "(b + gA2) / gC2"),
    ("0", "(b + gA2 - gC2) / gA2", "1", "(b - gC2) / gA2",
     "(b - gA2 - gC2) / (1 - gC2)", "1"),
]

# m = 3: the 29-chain family (pA1, pA2, pA3, pB1, pB2, pB3, pC1, pC2, pC3).
TABLE_M3 = [
    ("0", "0", "1", "1", "1", "(b - gC3) / gA3",
     "(b - gA3 - gC3) / (1 - gC2 - gC3)", "(b + gC2 - 1 - gA3) / gC2",
     "b / gC3"),
    ("0", "(b + gA2 + gA3 - gC2 - gC3) / gA2", "(b + gA3 - 1 - gA2) / gA3",
     "1", "(b + gA3 - 1) / gA2", "0",
     "(b + gA3 - gC2 - gC3) / (1 - gC2 - gC3)", "1", "1"),
    ("1", "1", "1", "0", "(b - gA3) / gA2", "b / gA3",
     "(b - gA2 - gA3 - gC2 - gC3) / (1 - gC2 - gC3)",
     "(b - gA2 - gA3 - gC3) / gC2", "(b - gA2 - gA3) / gC3"),
    ("0", "1", "1", "1", "(b + gC2 - 1 - gA3) / gA2",
     "(b + gC2 + gC3 - 1) / gA3", "b / (1 - gC2 - gC3)", "0",
     "(b + gC2 + gC3 - 1 - gA3) / gC3"),
    ("0", "(b - gA3 - gC3) / gA2", "b / gA3", "1", "1", "1",
     "(b - gA2 - gA3 - gC2 - gC3) / (1 - gC2 - gC3)",
     "(b - gA2 - gA3 - gC3) / gC2", "(b - gA3) / gC3"),
    ("0", "(b - gC3) / gA2", "(b + gA3 - gC3) / gA3", "1", "1",
     "(b - gA2 - gC3) / gA3",
     "(b - gA2 - gA3 - gC3) / (1 - gC2 - gC3)", "0", "1"),
    ("1", "1", "1", "0", "(b + gC2 + gC3 - 1) / gA2", "0",
     "b / (1 - gC2 - gC3)", "(b + gC2 + gC3 - 1 - gA2) / gC2",
     "(b + gC3 - 1 - gA2) / gC3"),
    ("1", "1", "1", "0", "(b - gC2) / gA2", "(b - gA2 - gC2) / gA3",
     "(b - gA2 - gA3 - gC2) / (1 - gC2 - gC3)", "b / gC2", "0"),
    ("0", "1", "0", "1", "0", "(b + gA3 - 1) / gA3",
     "(b + gA3 - gC3) / (1 - gC2 - gC3)", "(b + gA3 + gC2 - 1) / gC2", "1"),
    ("0", "1", "1", "1", "0", "(b - gC2) / gA3",
     "(b - gA3 - gC2 - gC3) / (1 - gC2 - gC3)", "b / gC2",
     "(b - gA3 - gC2) / gC3"),
    ("0", "(b + gC2 + gC3 - 1 - gA3) / gA2", "1", "1", "1", "b / gA3",
     "(b - gA3) / (1 - gC2 - gC3)", "0", "0"),
    ("1", "1", "1", "0", "(b - gA3 - gC2) / gA2", "(b - gC2) / gA3",
     "(b - gA2 - gA3 - gC2 - gC3) / (1 - gC2 - gC3)", "b / gC2",
     "(b - gA2 - gA3 - gC2) / gC3"),
    ("0", "0", "0", "1", "1", "(b + gA3 - gC3) / gA3",
     "(b - gC3) / (1 - gC2 - gC3)", "(b + gC2 - 1) / gC2", "1"),
    ("1", "1", "1", "0", "0", "0", "(b - gC3) / (1 - gC2 - gC3)",
     "(b + gC2 - 1) / gC2", "b / gC3"),
    ("0", "0", "b / gA3", "1", "1", "1",
     "(b - gA3 - gC2 - gC3) / (1 - gC2 - gC3)", "(b - gA3) / gC2",
     "(b - gA3 - gC2) / gC3"),
    ("1", "1", "1", "0", "0", "0",
     "(b - gC2 - gC3) / (1 - gC2 - gC3)", "b / gC2", "(b - gC2) / gC3"),
    ("0", "0", "0", "1", "(b + gA2 + gA3 - gC2 - gC3) / gA2",
     "(b + gA3 - gC2 - gC3) / gA3",
     "(b - gC2 - gC3) / (1 - gC2 - gC3)", "1", "1"),
    ("0", "1", "1", "1", "b / gA2", "(b - gA2) / gA3",
     "(b - gA2 - gA3) / (1 - gC2 - gC3)", "0", "0"),
    ("0", "1", "1", "1", "(b + gC2 - 1) / gA2", "0",
     "(b - gC3) / (1 - gC2 - gC3)", "0", "b / gC3"),
    ("1", "1", "1", "0", "0", "(b + gC2 + gC3 - 1) / gA3",
     "b / (1 - gC2 - gC3)", "(b + gC2 + gC3 - 1 - gA3) / gC2", "0"),
    ("0", "0", "0", "1", "(b + gA2 + gA3 - 1) / gA2",
     "(b + gA3 - 1) / gA3",
     "(b + gA2 + gA3 - gC2 - gC3) / (1 - gC2 - gC3)", "1", "1"),
    ("1", "1", "1", "0", "(b - gC3) / gA2", "0",
     "(b - gA2 - gC3) / (1 - gC2 - gC3)", "0", "b / gC3"),
    ("0", "(b + gC2 - 1 - gA3) / gA2", "(b + gC2 - 1) / gA3", "1", "1",
     "1", "b / (1 - gC2 - gC3)", "0", "(b + gC2 + gC3 - 1) / gC3"),
    ("0", "1", "1", "1", "(b + gC3 - 1) / gA2", "0",
     "(b - gC2) / (1 - gC2 - gC3)", "b / gC2",
     "(b + gC3 - 1 - gA2) / gC3"),
    ("0", "(b + gA2 - gC2 - gC3) / gA2",
     "(b + gA2 + gA3 - gC2 - gC3) / gA3", "1", "(b - gC2 - gC3) / gA2",
     "0", "(b - gA2 - gC2 - gC3) / (1 - gC2 - gC3)", "1", "1"),
    ("0", "0", "0", "1", "1", "1", "(b - gC2) / (1 - gC2 - gC3)",
     "b / gC2", "(b + gC3 - 1) / gC3"),
    ("1", "1", "1", "0", "0", "(b - gC2) / gA3",
     "(b - gA3 - gC2) / (1 - gC2 - gC3)", "b / gC2", "0"),
    ("0", "1", "1", "1", "(b - gA3) / gA2", "b / gA3",
     "(b - gA2 - gA3 - gC3) / (1 - gC2 - gC3)", "0",
     "(b - gA2 - gA3) / gC3"),
    ("0", "0", "0", "1", "(b + gA2 - 1) / gA2",
     "(b + gA2 + gA3 - gC2 - gC3) / gA3",
     "(b + gA2 - gC2 - gC3) / (1 - gC2 - gC3)", "1", "1"),
]

# Uniform-g setting (all of F1 in A_2, thresholds g_1 = g_hat, g_2 = g_hat + eps):
# every valid algorithm over the nonempty sets {A_2, B_2, C_1, C_2}.
TABLE_UNIFORM = [
    ("0", "0", "0", "1", "b / (1 - gC2)", "(b + gC2 - 1) / gC2"),
    ("0", "0", "0", "(b + gA2 - 1) / gA2", "(b + gA2 - gC2) / (1 - gC2)", "1"),
    ("0", "0", "0", "(b + gA2 - gC2) / gA2", "(b - gC2) / (1 - gC2)", "1"),
    ("0", "1", "0", "0", "b / (1 - gC2)", "(b + gC2 - 1) / gC2"),
    ("0", "1", "0", "(b + gC2 - 1) / gA2", "b / (1 - gC2)", "0"),
    ("0", "1", "0", "b / gA2", "(b - gA2) / (1 - gC2)", "0"),
    ("0", "1", "0", "b / gA2", "(b - gA2 - gC2) / (1 - gC2)", "(b - gA2) / gC2"),
    ("0", "1", "0", "(b - gC2) / gA2", "(b - gA2 - gC2) / (1 - gC2)", "b / gC2"),
    ("0", "(b + gA2 - 1) / gA2", "0", "0", "(b + gA2 - gC2) / (1 - gC2)", "1"),
    ("0", "(b + gC2 - 1) / gA2", "0", "1", "b / (1 - gC2)", "0"),
    ("0", "b / gA2", "0", "1", "(b - gA2) / (1 - gC2)", "0"),
    ("0", "(b + gA2 - gC2) / gA2", "0", "0", "(b - gC2) / (1 - gC2)", "1"),
    ("0", "(b - gC2) / gA2", "0", "1", "(b - gA2 - gC2) / (1 - gC2)", "b / gC2"),
    ("0", "(b - gC2) / gA2", "0", "(b + gA2 - gC2) / gA2",
     "(b - gA2 - gC2) / (1 - gC2)", "1"),
]

_RAW = {"alg1": TABLE_M1, "alg2": TABLE_M2, "alg3": TABLE_M3,
        "uniform": TABLE_UNIFORM}
_M = {"alg1": 1, "alg2": 2, "alg3": 3, "uniform": 2}


@lru_cache(maxsize=None)
def builtin_tables() -> dict:
    """Published chain families as parsed parameter expressions.

    Returns {name: (m, [chain dict set_name -> clamp01(Expr)])}.
    """
    out = {}
    for name, rows in _RAW.items():
        m = _M[name]
        names = set_names(m)
        chains = []
        for row in rows:
            assert len(row) == 3 * m
            chains.append({w: clamp01(reduce_ratio(parse(f)))
                           for w, f in zip(names, row)})
        out[name] = (m, chains)
    return out
