#!/usr/bin/env python3
"""Smoke test for the bsdlab_py extension.

Build it first with `pip install --no-build-isolation -e crates/python`.
"""

import math
import random
from fractions import Fraction

import bsdlab_py as b

E37 = [0, 0, 1, -1, 0]

delta, (jn, jd) = b.invariants(E37)
assert delta == 37, delta
assert Fraction(jn, jd) == Fraction(110592, 37)

# 37a1: generator (0, 0), real period, and a_p
h = b.canonical_height(E37, "[0:0]")
assert abs(h - 0.0511114082399688) < 1e-12, h
assert abs(b.regulator(E37, ["[0:0]"]) - h) < 1e-12
assert abs(b.real_period(E37) - 5.98691729246392) < 1e-10
assert [b.ap(E37, p)[0] for p in (2, 3, 5, 7, 11)] == [-2, -3, -2, -1, -5]
assert b.ap(E37, 37) == (-1, "multiplicative")

big = [0, 0, 0, -(10**30) + 1, 0]
assert b.invariants(big)[0] == -16 * 4 * (-(10**30) + 1) ** 3

assert b.bsd_rhs(1.0, 2.0, 3.0, 4.0, 2.0) == 6.0

bars = b.barcode([[0, 0], [1, 0], [1, 1], [0, 1]], max_dim=1)
h1 = [(x, y) for d, x, y in bars if d == 1]
assert len(h1) == 1 and h1[0][0] == 1.0 and abs(h1[0][1] - math.sqrt(2)) < 1e-15, h1
assert sum(1 for d, _, y in bars if d == 0 and math.isinf(y)) == 1

rng = random.Random(5)
xs = [[rng.gauss(0, 1)] for _ in range(60)]
ys = [[rng.gauss(3, 1)] for _ in range(60)]
_, p = b.permutation_test(xs, ys, n_perm=199, seed=1)
assert p == 1 / 200, p
assert b.permutation_test(xs, ys, n_perm=199, seed=1) == b.permutation_test(xs, ys, n_perm=199, seed=1)

for bad in ([0, 0, 0, 0, 0], [1, 2, 3]):
    try:
        b.real_period(bad)
    except ValueError:
        pass
    else:
        raise AssertionError(bad)

print("ok")
