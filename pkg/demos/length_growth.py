"""
How fast does the longest string grow?
======================================

The covering bound depends on the longest string in the sample. Its
expectation grows logarithmically under a geometric length law and
polynomially under a power law.
"""

from wfabounds.experiments import ExperimentSpec, run_growth_study

grid = (100, 1000, 10_000)
for family in ("geometric", "powerlaw"):
    spec = ExperimentSpec("growth", family=family, m_grid=grid, trials=10, seed=0, s=2.0)
    _, summary = run_growth_study(spec)
    print(family)
    for m, L, ratio in zip(summary["m"], summary["L_m"], summary["ratio_log"]):
        print(f"  m={int(m):6d}  L_m={L:8.1f}  L_m/log m={ratio:6.2f}")
    print(f"  fit vs log m:  R^2={summary['fit_log']['r2']:.3f}")
    print(f"  fit vs m^(1/s): R^2={summary['fit_power']['r2']:.3f}")
