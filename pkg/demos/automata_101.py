"""
Weighted automata in a few lines
================================

Build a small weighted automaton, evaluate it, and look at the parameter
norm that defines the classes ``A_{n,p,r}``.
"""

import itertools

import numpy as np

from wfabounds import (Alphabet, WeightedAutomaton, conjugate, evaluate, evaluate_path_sum,
                       make_dfa, wfa_norm)

# Three states over {a, b}. The value on a string is a product of
# transition matrices sandwiched between the initial and final weights.
A = WeightedAutomaton(
    Alphabet(("a", "b")),
    alpha=[1, 3, 4],
    beta=[2, 1, 1],
    trans={"a": [[0, 0, 3], [0, 0, 3], [1, 0, 0]],
           "b": [[0, 1, 0], [2, 0, 0], [0, 0, 4]]},
)
print("f(ab) =", evaluate(A, "ab"))

# The same number is a sum over all state paths labelled by the string.
print("path sum on ab =", evaluate_path_sum(A, "ab"))

# Different parameters can compute the same function: any invertible change
# of basis leaves every value unchanged.
Q = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.2, 0.0, 2.0]])
B = conjugate(A, Q)
gap = max(abs(evaluate(A, x) - evaluate(B, x))
          for t in range(4) for x in itertools.product("ab", repeat=t))
print(f"largest difference after conjugation: {gap:.2e}")

# The parameter norm takes the largest of |alpha|_p, |beta|_q and the
# induced q-norms of the transition matrices.
for p in (1, 2, np.inf):
    print(f"||A||_(p={p}) = {wfa_norm(A, p):.4f}")

# Deterministic automata are weighted automata with 0/1 weights.
ends_in_a = make_dfa(Alphabet(("a", "b")), 2,
                     {(0, "a"): 1, (0, "b"): 0, (1, "a"): 1, (1, "b"): 0}, 0, [1])
print("DFA on 'bba':", evaluate(ends_in_a, "bba"), " on 'ab':", evaluate(ends_in_a, "ab"))
