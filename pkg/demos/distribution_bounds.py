"""
From a distribution to a generalization bound
=============================================

Compute the distribution parameters of a probabilistic automaton, check the
collision-statistic lemma by simulation, and assemble full generalization
bounds.
"""

from wfabounds import BoundQuery, cm_wm_lemma_check, dist_params, generalization_bound
from wfabounds.experiments import geometric_pfa

pfa = geometric_pfa(k=2, stop=0.5)
dp = dist_params(pfa, L=16)
print(f"D_max = {dp.D_max} at {pfa.alphabet.format(dp.argmax)} (exact: {dp.D_max_exact})")
print(f"D_max^v in [{dp.D_max_vee:.6f}, {dp.D_max_vee_upper:.6f}]")

# The expected largest multiplicity grows like m D_max.
for m in (25, 50, 100):
    rep = cm_wm_lemma_check(pfa, m, trials=100, seed=3, params=dp)
    print(f"m={m:3d}: C_m = {rep.C_m:6.2f} +- {rep.C_m_se:.2f} vs m D_max = {m * dp.D_max:5.1f};"
          f" W_m = {rep.W_m:6.2f} vs m D_max^v = {m * dp.D_max_vee:5.1f}")

# Generalization slack for a 0/1-bounded, 1-Lipschitz loss.
m = 1000
queries = [
    BoundQuery("A", m, r=1.0, n=2, k=2, L_S=12, delta=0.05),
    BoundQuery("R1r", m, r=1.0, C_S=520, delta=0.05),
    BoundQuery("R1r", m, r=1.0, D_max=dp.D_max, delta=0.05),
    BoundQuery("R2r", m, r=1.0, delta=0.05),
    BoundQuery("H1r", m, r=1.0, W_S=660, delta=0.05),
    BoundQuery("H1r", m, r=1.0, D_max_vee=dp.D_max_vee, delta=0.05),
]
for q in queries:
    rep = generalization_bound(q)
    print(f"\n{rep.name}: {rep.value:.4f}")
    for name, value, anchor in rep.terms:
        print(f"    {name:18s} {value:.4f}   [{anchor}]")
