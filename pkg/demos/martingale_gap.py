#!/usr/bin/env python3
"""Orbit averages against cylinder-pushforward averages, on one sampled word.

For a sampled point x_w the empirical Fourier mode of its T_p orbit is
compared with the average of the closed-form modes of the cylinder
pushforwards cut at the stopping times: the factor r = p^n * slope(prefix)
always lands in [min |s_i|, 1), so the cylinder side is an average of the
measure's own transform at rescaled frequencies.  The two sides converge to
each other as N grows; watching the gap shrink is a desk-scale view of why
Fourier decay controls pointwise normality.
"""

import numpy as np

from normality_lab import WordStream, cantor_system, stopping_records
from normality_lab.martingale import martingale_gaps

cantor = cantor_system()
p = 2

print("stopping-time anatomy (one word, p = 2):")
recs = stopping_records(cantor, WordStream(cantor, seed=3), 8, p)
print(" n   beta_n   |slope prefix|        r = p^n * slope")
for rec in recs:
    print(f"{rec.n:2d}   {rec.beta:6d}   3^-{rec.beta:<6d}"
          f"         {rec.r} = {float(rec.r):.4f}")
print("(|r| always in [1/3, 1): the stopping rule is pinned between two"
      " powers of the contraction)\n")

print("gap between empirical orbit modes and cylinder-average modes")
print("Cantor measure, p = 2, five seeds, q in {1, 2, 3}:\n")
schedule = [100, 1000, 10000]
print(" q        N=100      N=1000     N=10000")
for q in (1, 2, 3):
    rows = []
    for seed in range(5):
        series = martingale_gaps(cantor, seed, [q], schedule, p, tol=1e-6)
        rows.append(series[0].gaps)
    med = np.median(np.array(rows), axis=0)
    print(f" {q}    " + "  ".join(f"{g:9.4f}" for g in med))

print("""
Both sides of the comparison see the same sampled word: the empirical side
reads the orbit off a certified digit stream, the cylinder side evaluates
exact transform values at the rescaled frequencies q * r(w, n).  The gap
dropping roughly like the orbit's own fluctuation scale is the numerical
shadow of the almost-sure convergence behind the normality criterion.
""")
