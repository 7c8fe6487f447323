"""
Hankel singular values from two small linear systems
====================================================

The Hankel matrix of a rational function is infinite, yet its singular
values come from two ``n x n`` Gramians. Here they are compared with the
SVD of growing finite blocks.
"""

import numpy as np

from wfabounds import (Alphabet, WeightedAutomaton, hankel_singular_values, l2_norm_squared,
                       schatten_hankel_norm, truncated_hankel_svd)
from wfabounds.experiments import random_contractive, run_hankel_convergence

# f(a^t) = 0.5^t has a rank-one Hankel matrix with singular value 4/3.
geo = WeightedAutomaton(Alphabet(("a",)), [1.0], [1.0], [[[0.5]]])
print("geometric spectrum:", hankel_singular_values(geo).singular_values)
print("squared l2 norm:   ", l2_norm_squared(geo).value)

# A random automaton, rescaled so the Kronecker criterion holds with margin.
A = random_contractive(np.random.default_rng(0), k=2, n=3, rho=0.4)
spec = hankel_singular_values(A)
print("\nGramian singular values:", spec.singular_values)
print("Gramian residuals:", spec.residuals)

# Finite blocks over prefixes and suffixes of length <= L approach the
# Gramian values from below.
for L in (2, 5, 10, 20):
    print(f"L = {L:2d}:", truncated_hankel_svd(A, L)[:3])

rows, summary = run_hankel_convergence(A, (2, 5, 10, 20, 30))
print("\nmax relative gap per L:", ["%.1e" % g for g in summary["gaps"]])
print("monotone:", summary["monotone"])

for p in (1, 2, "inf"):
    print(f"Schatten-Hankel {p}-norm: {schatten_hankel_norm(A, p):.6f}")
