"""
Exact Rademacher complexities next to their bounds
==================================================

Draw a sample from a probabilistic automaton, compute the sample
statistics, and compare exact empirical Rademacher complexities with the
closed-form bounds that depend on those statistics.
"""

import math

from wfabounds import (AscentConfig, bound_H1r, bound_R1r, bound_R2r, bound_RAnr,
                       rademacher_Anpr_lower, rademacher_Hpr_bound, rademacher_Rpr, sample_pfa,
                       ws_stat)
from wfabounds.experiments import geometric_pfa

# Stop with probability 0.5 at every step, otherwise emit a or b.
pfa = geometric_pfa(k=2, stop=0.5)
S = sample_pfa(pfa, m=10, seed=1)
print("sample:", [pfa.alphabet.format(x) for x in S.strings])

ws = ws_stat(S)
print(f"L_S = {S.max_length}, C_S = {S.max_multiplicity}, W_S = {ws.value} ({ws.exactness})")

r = 1.0
r2 = rademacher_Rpr(S, r, p=2)
low, high = bound_R2r(S.m, r).lower, bound_R2r(S.m, r).value
print(f"\nR_(2,r):  {low:.4f} <= {r2.value:.4f} <= {high:.4f}")

r1 = rademacher_Rpr(S, r, p=1)
print(f"R_(1,r):  {r1.value:.4f} <= {bound_R1r(S.m, r, S.max_multiplicity).value:.4f}")

h2 = rademacher_Hpr_bound(S, ws.witness, r, p=2)
h1 = rademacher_Hpr_bound(S, ws.witness, r, p=1)
print(f"H_(2,r):  {h2.value:.4f} <= {r / math.sqrt(S.m):.4f}")
print(f"H_(1,r):  {h1.value:.4f} <= {bound_H1r(S.m, r, ws.value).value:.4f}")

# No exact algorithm exists for the parameter-norm class; gradient ascent
# gives a lower estimate to set against the covering-number bound.
lower = rademacher_Anpr_lower(S, n=2, p=1, r=r, mode="mc", draws=20, seed=0,
                              config=AscentConfig(restarts=8, steps=60))
print(f"A_(2,1,r): {lower.value:.4f} (lower, se {lower.standard_error:.4f})"
      f" <= {bound_RAnr(S.m, 2, 2, r, S.max_length).value:.4f}")

# Monte Carlo agrees with exact enumeration within its standard error.
mc = rademacher_Rpr(S, r, p=2, mode="mc", draws=20_000, seed=7)
print(f"\nMonte Carlo R_(2,r): {mc.value:.4f} +- {mc.standard_error:.4f}")
