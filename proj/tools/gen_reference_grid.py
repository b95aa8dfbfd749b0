#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generate synthetic raw-score lists whose mean and sample SD round
(half-up, two decimals) to a published mean (SD) grid.

Each score is k/21 where k is either 21 (no violation) or an even number
(the turn before a tutor-turn violation). Output is deterministic.
"""
import random
from fractions import Fraction
from math import isqrt

TOTAL = 21
RUNS = 20
ALLOWED = [k for k in range(0, TOTAL, 2)] + [TOTAL]

GRID = [
    ("DeepSeek-V3.2", [(0.67, 0.16), (1.00, 0.00), (1.00, 0.00), (1.00, 0.00)]),
    ("ChatGPT-5", [(0.46, 0.06), (0.63, 0.23), (0.90, 0.16), (0.39, 0.26)]),
    ("Phi4-14.7B", [(0.59, 0.16), (0.32, 0.27), (0.52, 0.28), (0.75, 0.36)]),
]


def round2(x: Fraction) -> int:
    return (x * 100 + Fraction(1, 2)).__floor__()


def round2_sqrt(v: Fraction) -> int:
    # largest m with ((2m-1)/200)^2 <= v, m >= 0
    m = 0
    while Fraction(2 * (m + 1) - 1, 200) ** 2 <= v:
        m += 1
    return m


def stats(ks):
    xs = [Fraction(k, TOTAL) for k in ks]
    n = len(xs)
    mean = sum(xs) / n
    var = sum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var


def cost(ks, tm, ts):
    mean, var = stats(ks)
    sd = float(var) ** 0.5
    c = abs(float(mean) - tm) + abs(sd - ts)
    if round2(mean) == round(tm * 100) and round2_sqrt(var) == round(ts * 100):
        return 0.0
    return c + 1e-3


def search(tm, ts, rng):
    ks = [rng.choice(ALLOWED) for _ in range(RUNS)]
    best = cost(ks, tm, ts)
    for _ in range(200000):
        if best == 0.0:
            return sorted(ks)
        cand = list(ks)
        cand[rng.randrange(RUNS)] = rng.choice(ALLOWED)
        c = cost(cand, tm, ts)
        if c <= best:
            ks, best = cand, c
    raise RuntimeError(f"no list for {tm} ({ts})")


def main():
    rng = random.Random(20251119)
    print("# agent,level,scores (numerators over 21, one run each)")
    for agent, cells in GRID:
        for i, (tm, ts) in enumerate(cells, start=1):
            ks = search(tm, ts, rng)
            print(f"{agent},L{i},{' '.join(str(k) for k in ks)}")


if __name__ == "__main__":
    main()
