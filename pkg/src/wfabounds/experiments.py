"""Reproducible experiment sweeps that write CSV.

Three experiments are available:

``inequality``
    per-sample checks of the exact Rademacher values against their bounds;
``growth``
    growth of ``L_m`` with ``m`` for light- and heavy-tailed length models;
``hankel``
    convergence of truncated Hankel singular values to the Gramian ones.

Specs are flat ``key = value`` text files; see :func:`parse_spec`.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .automaton import (Alphabet, StringSample, WeightedAutomaton, derive_seed, make_pfa,
                        sample_pfa)
from .errors import DomainError
from .hankel import hankel_singular_values, truncated_hankel_svd
from .io import load_automaton
from .linalg import kron_sum, spectral_radius
from .rademacher import AscentConfig, rademacher_Anpr_lower, rademacher_Hpr_bound, rademacher_Rpr
from .sample_stats import ws_stat

#: Lengths of the power-law model are truncated here and renormalised.
POWER_LAW_MAX_LEN = 10_000
TOL = 1e-12

INEQUALITY_HEADER = [
    "m", "trial", "seed", "L_S", "C_S", "W_S", "W_S_exactness",
    "R2r_exact", "R2r_lower", "R2r_upper", "R1r_exact", "R1r_bound",
    "H2r_exact", "H2r_bound", "H1r_exact", "H1r_bound", "Anr_lower", "Anr_bound", "violations",
]
GROWTH_HEADER = ["m", "trial", "seed", "L_S"]
HANKEL_HEADER = ["L", "index", "truncated", "gramian", "relative_gap", "max_relative_gap"]


@dataclass
class ExperimentSpec:
    experiment: str
    family: str = "geometric"
    model: str | None = None
    m_grid: tuple = (2, 4, 8)
    trials: int = 10
    seed: int = 0
    output: str | None = None
    k: int = 2
    stop: float = 0.5
    s: float = 2.0
    r: float = 1.0
    n: int = 2
    c: float = 0.5
    rho: float = 0.5
    L_grid: tuple = (5, 10, 20)
    ascent_draws: int = 0
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in ("inequality", "growth", "hankel"):
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.experiment != "hankel" and not self.m_grid:
            raise DomainError("m_grid must be nonempty")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")


_INT_KEYS = {"trials", "seed", "k", "n", "ascent_draws", "jobs"}
_FLOAT_KEYS = {"stop", "s", "r", "c", "rho"}
_LIST_KEYS = {"m_grid", "L_grid"}


def parse_spec(text: str) -> ExperimentSpec:
    """Parse ``key = value`` lines (``#`` comments allowed) into a spec."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[spec]\n" + text)
    except configparser.Error as exc:
        raise DomainError(f"malformed experiment spec: {exc}") from exc
    kw, extra = {}, {}
    for key, raw in cp["spec"].items():
        try:
            if key in _INT_KEYS:
                kw[key] = int(raw)
            elif key in _FLOAT_KEYS:
                kw[key] = float(raw)
            elif key in _LIST_KEYS:
                kw[key] = tuple(int(v) for v in raw.replace(",", " ").split())
            elif key in ("experiment", "family", "model", "output"):
                kw[key] = raw.strip()
            else:
                extra[key] = raw
        except ValueError as exc:
            raise DomainError(f"bad value for {key}: {raw!r}") from exc
    if "experiment" not in kw:
        raise DomainError("experiment spec needs an 'experiment' key")
    if extra:
        raise DomainError(f"unknown keys in experiment spec: {sorted(extra)}")
    return ExperimentSpec(**kw)


def load_spec(path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text())


def geometric_pfa(k: int = 1, stop: float = 0.5) -> WeightedAutomaton:
    """One-state PFA: stop with probability ``stop``, else emit a uniform symbol."""
    alphabet = Alphabet.of_size(k)
    return make_pfa(alphabet, [1.0], np.full((k, 1, 1), (1.0 - stop) / k), [stop])


def stop_pfa(k: int = 1) -> WeightedAutomaton:
    """PFA that always outputs the empty string."""
    return geometric_pfa(k, 1.0)


def power_law_sample(m: int, seed: int, s: float, k: int = 2,
                     max_len: int = POWER_LAW_MAX_LEN) -> StringSample:
    """Lengths with ``P[len = t]`` proportional to ``(t + 1)^-(s + 1)``, ``t <= max_len``;
    symbols uniform. String ``i`` uses the stream seeded by ``(seed, i)``."""
    t = np.arange(max_len + 1)
    cdf = np.cumsum((t + 1.0) ** -(s + 1.0))
    cdf /= cdf[-1]
    out = []
    for i in range(m):
        rng = np.random.default_rng([seed, i])
        length = int(np.searchsorted(cdf, rng.random(), side="right"))
        out.append(tuple(int(a) for a in rng.integers(0, k, size=min(length, max_len))))
    return StringSample(tuple(out), Alphabet.of_size(k))


def make_sampler(spec: ExperimentSpec):
    """``(m, seed) -> StringSample`` for the model described by ``spec``."""
    fam = spec.family
    if fam == "pfa":
        if spec.model is None:
            raise DomainError("family 'pfa' needs a model file")
        A = load_automaton(spec.model)
        return lambda m, seed: sample_pfa(A, m, seed)
    if fam == "geometric":
        A = geometric_pfa(spec.k, spec.stop)
        return lambda m, seed: sample_pfa(A, m, seed)
    if fam == "constant0":
        A = stop_pfa(spec.k)
        return lambda m, seed: sample_pfa(A, m, seed)
    if fam == "powerlaw":
        return lambda m, seed: power_law_sample(m, seed, spec.s, spec.k)
    raise DomainError(f"unknown family {fam!r}")


def trial_seed(seed: int, m: int, trial: int) -> int:
    return derive_seed(seed, m, trial)


def _work_items(spec):
    return [(m, t) for m in spec.m_grid for t in range(spec.trials)]


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def inequality_row(S: StringSample, r: float = 1.0, ascent_draws: int = 0, seed: int = 0) -> dict:
    """Exact complexities of one sample next to their bounds, with a violation count."""
    m = S.m
    ws = ws_stat(S, seed=seed)
    r2 = rademacher_Rpr(S, r, 2, "exact").value
    r1 = rademacher_Rpr(S, r, 1, "exact").value
    h2 = rademacher_Hpr_bound(S, ws.witness, r, 2, "exact").value
    h1 = rademacher_Hpr_bound(S, ws.witness, r, 1, "exact").value if m <= 12 else math.nan
    b_r2 = bounds.bound_R2r(m, r)
    row = {
        "L_S": S.max_length, "C_S": S.max_multiplicity, "W_S": ws.value,
        "W_S_exactness": ws.exactness,
        "R2r_exact": r2, "R2r_lower": b_r2.lower, "R2r_upper": b_r2.value,
        "R1r_exact": r1, "R1r_bound": bounds.bound_R1r(m, r, S.max_multiplicity).value,
        "H2r_exact": h2, "H2r_bound": bounds.bound_H2r(m, r).value,
        "H1r_exact": h1, "H1r_bound": bounds.bound_H1r(m, r, ws.value).value,
        "Anr_lower": math.nan, "Anr_bound": math.nan,
    }
    if ascent_draws and r > 0:
        cfg = AscentConfig(restarts=8, steps=60)
        row["Anr_lower"] = rademacher_Anpr_lower(S, 2, 1, r, "mc", ascent_draws, seed, cfg).value
        k = S.alphabet.k if S.alphabet is not None else 1
        row["Anr_bound"] = bounds.bound_RAnr(m, 2, k, r, S.max_length).value
    row["violations"] = count_violations(row)
    return row


def count_violations(row: dict, tol: float = TOL) -> int:
    checks = [
        row["R2r_exact"] >= row["R2r_lower"] - tol,
        row["R2r_exact"] <= row["R2r_upper"] + tol,
        row["R1r_exact"] <= row["R1r_bound"] + tol,
        row["H2r_exact"] <= row["H2r_bound"] + tol,
        math.isnan(row["H1r_exact"]) or row["H1r_exact"] <= row["H1r_bound"] + tol,
        math.isnan(row["Anr_lower"]) or row["Anr_lower"] <= row["Anr_bound"] + tol,
    ]
    return sum(not c for c in checks)


def run_inequality_suite(spec: ExperimentSpec):
    """Rows (one per ``(m, trial)``) and a summary with the total violation count."""
    sampler = make_sampler(spec)

    def job(item):
        m, t = item
        seed = trial_seed(spec.seed, m, t)
        row = inequality_row(sampler(m, seed), spec.r, spec.ascent_draws, seed)
        return {"m": m, "trial": t, "seed": seed, **row}

    rows = _map(job, _work_items(spec), spec.jobs)
    summary = {"rows": len(rows), "violations": sum(r["violations"] for r in rows)}
    return rows, summary


def _fit(x, y):
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"intercept": float(coef[0]), "slope": float(coef[1]), "r2": r2}


def run_growth_study(spec: ExperimentSpec):
    """Mean max length ``L_m`` over the grid with least-squares fits.

    Fits ``L_m ~ a + b log m`` and ``L_m ~ a + b m^(1/s)``; diagnostics only.
    """
    sampler = make_sampler(spec)

    def job(item):
        m, t = item
        seed = trial_seed(spec.seed, m, t)
        return {"m": m, "trial": t, "seed": seed, "L_S": sampler(m, seed).max_length}

    rows = _map(job, _work_items(spec), spec.jobs)
    ms = np.array(sorted(set(spec.m_grid)), dtype=float)
    L_m = np.array([np.mean([r["L_S"] for r in rows if r["m"] == m]) for m in ms])
    summary = {
        "m": ms.tolist(), "L_m": L_m.tolist(),
        "ratio_log": (L_m / np.log(ms)).tolist() if np.all(ms > 1) else None,
        "fit_log": _fit(np.log(ms), L_m),
        "fit_power": _fit(ms ** (1.0 / spec.s), L_m),
    }
    return rows, summary


def random_contractive(rng, k: int, n: int, rho: float = 0.5) -> WeightedAutomaton:
    """Gaussian automaton rescaled so that ``rho(sum_a A_a (x) A_a) = rho``."""
    rng = np.random.default_rng(rng)
    A = WeightedAutomaton.random(rng, Alphabet.of_size(k), n)
    cur = spectral_radius(kron_sum(A.trans))
    trans = A.trans * math.sqrt(rho / cur) if cur > 0 else A.trans
    return WeightedAutomaton(A.alphabet, A.alpha, A.beta, trans)


def hankel_family(spec: ExperimentSpec) -> WeightedAutomaton:
    if spec.family == "geometric":
        return WeightedAutomaton(Alphabet.of_size(1), [1.0], [1.0], [[[spec.c]]])
    if spec.family == "zero":
        return WeightedAutomaton.zero(Alphabet.of_size(spec.k), spec.n)
    if spec.family == "random":
        return random_contractive(spec.seed, spec.k, spec.n, spec.rho)
    if spec.family == "pfa" and spec.model:
        return load_automaton(spec.model)
    raise DomainError(f"unknown automaton family {spec.family!r}")


def run_hankel_convergence(A: WeightedAutomaton, L_grid, floor: float = 1e-12):
    """Truncated versus Gramian singular values for each cutoff in ``L_grid``.

    The relative gap of value ``i`` is ``|t_i - s_i| / s_i``, skipping values
    below ``floor * s_1``. The summary reports whether the largest gap is
    nonincreasing along the grid.
    """
    s = hankel_singular_values(A).singular_values
    rows, gaps = [], []
    for L in L_grid:
        t = truncated_hankel_svd(A, L, L, method="gram")
        t = np.concatenate([t, np.zeros(max(0, s.size - t.size))])[:s.size]
        keep = s > floor * (s[0] if s.size else 0.0)
        rel = np.zeros_like(s)
        rel[keep] = np.abs(t[keep] - s[keep]) / s[keep]
        gap = float(np.max(rel)) if rel.size else 0.0
        gaps.append(gap)
        for i in range(s.size):
            rows.append({"L": L, "index": i, "truncated": float(t[i]), "gramian": float(s[i]),
                         "relative_gap": float(rel[i]), "max_relative_gap": gap})
    monotone = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(gaps, gaps[1:]))
    return rows, {"gaps": gaps, "monotone": monotone}


def run(spec: ExperimentSpec):
    """Dispatch on ``spec.experiment``; returns ``(header, rows, summary)``."""
    if spec.experiment == "inequality":
        rows, summary = run_inequality_suite(spec)
        return INEQUALITY_HEADER, rows, summary
    if spec.experiment == "growth":
        rows, summary = run_growth_study(spec)
        return GROWTH_HEADER, rows, summary
    rows, summary = run_hankel_convergence(hankel_family(spec), spec.L_grid)
    return HANKEL_HEADER, rows, summary


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r[h]) for h in header])
    return buf.getvalue()
