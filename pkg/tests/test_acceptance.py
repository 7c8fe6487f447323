"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line; the lines are repeated in
the terminal summary.
"""

import itertools
import math
import os
import subprocess
import sys
import time
from collections import Counter

import numpy as np

from wfabounds import (Alphabet, AscentConfig, SplitAssignment, StringSample, WeightedAutomaton,
                       bound_R1r, bound_R2r, bound_RAnr, cm_wm_lemma_check, evaluate,
                       evaluate_path_sum, hankel_singular_values, l2_norm_squared,
                       lp_norm_truncated, rademacher_Anpr_lower, rademacher_Hpr_bound,
                       rademacher_Rpr, truncated_hankel_svd, wfa_norm, ws_exhaustive,
                       ws_heuristic)
from wfabounds.experiments import geometric_pfa, random_contractive
from wfabounds.io import dumps_automaton
from wfabounds.norms import max_enumerable_length

from conftest import ACCEPTANCE_LINES, toy_automaton, geometric


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_sample(rng, m, k=2, max_len=3):
    return StringSample([tuple(rng.integers(0, k, size=rng.integers(0, max_len + 1)))
                         for _ in range(m)])


def contractive_fixtures():
    rng = np.random.default_rng(20240501)
    out = []
    for i in range(50):
        k = 1 + i % 2
        n = 1 + i % 3
        rho = float(rng.uniform(0.05, 0.5))
        out.append(random_contractive(rng, k, n, rho))
    return out


def test_criterion_01_toy():
    t0 = time.perf_counter()
    A = toy_automaton()
    v = evaluate(A, "ab")
    worst = 0.0
    for t in range(5):
        for x in itertools.product(range(2), repeat=t):
            worst = max(worst, abs(evaluate(A, x) - evaluate_path_sum(A, x)))
    norm = wfa_norm(A, 1)
    elapsed = time.perf_counter() - t0
    ok = v == 52.0 and worst <= 1e-12 and norm == 8.0 and elapsed < 1.0
    report(1, ok, f"f(ab)={v:g}, max path-sum gap={worst:.1e}, norm={norm:g}, {elapsed:.2f}s")


def test_criterion_02_R2r_sandwich():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    violations = 0
    for _ in range(200):
        S = random_sample(rng, int(rng.integers(1, 13)))
        r = float(rng.uniform(0.1, 3.0))
        v = rademacher_Rpr(S, r, 2, "exact").value
        b = bound_R2r(S.m, r)
        violations += not (b.lower - 1e-12 <= v <= b.value + 1e-12)
    elapsed = time.perf_counter() - t0
    report(2, violations == 0 and elapsed < 30, f"{violations} violations in 200 samples, "
                                                f"{elapsed:.1f}s")


def test_criterion_03_enumeration_equals_convolution():
    rng = np.random.default_rng(3)
    worst, count = 0.0, 0
    while count < 100:
        S = random_sample(rng, int(rng.integers(2, 13)), max_len=2)
        if S.max_multiplicity <= 1:
            continue
        count += 1
        for p in (1, 2, math.inf):
            a = rademacher_Rpr(S, 1.0, p, "exact", method="enumerate").value
            b = rademacher_Rpr(S, 1.0, p, "exact", method="convolve").value
            worst = max(worst, abs(a - b))
    report(3, worst <= 1e-12, f"max |enumerate - convolve| = {worst:.1e} over 100 fixtures")


def test_criterion_04_hankel_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for A in contractive_fixtures():
        s = hankel_singular_values(A).singular_values
        t = truncated_hankel_svd(A, 30, 30)
        top = np.concatenate([t, np.zeros(max(0, s.size - t.size))])[:s.size]
        # relative to each value; values below 1e-8 * s_1 are compared against s_1
        denom = np.maximum(s, 1e-8 * s[0])
        worst = max(worst, float(np.max(np.abs(top - s) / denom)))
        # the dense route returns more values than the rank; they must vanish
        if t.size > s.size:
            worst = max(worst, float(np.max(t[s.size:])) / s[0])
    geo = hankel_singular_values(geometric(0.5)).singular_values[0]
    geo_err = abs(geo - 4 / 3)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and geo_err <= 1e-8 and elapsed < 120
    report(4, ok, f"max relative gap at L=30: {worst:.1e}; geometric error {geo_err:.1e}; "
                  f"{elapsed:.1f}s")


def test_criterion_05_l2_oracle():
    bad = 0
    for A in contractive_fixtures():
        exact = l2_norm_squared(A)
        L = min(18, max_enumerable_length(A.k))
        trunc = lp_norm_truncated(A, 2, L)
        gap = exact.value - trunc.value ** 2
        bad += not (exact.status == "exact" and trunc.tail_bound is not None
                    and -1e-12 <= gap <= trunc.tail_bound + 1e-12)
    geo_err = abs(l2_norm_squared(geometric(0.5)).value - 4 / 3)
    report(5, bad == 0 and geo_err <= 1e-10,
           f"{bad} of 50 outside the tail bound; geometric error {geo_err:.1e}")


def _brute_ws(strings):
    best = len(strings)
    for cut in itertools.product(*(range(len(x) + 1) for x in strings)):
        pre = Counter(x[:c] for x, c in zip(strings, cut))
        suf = Counter(x[c:] for x, c in zip(strings, cut))
        best = min(best, max(max(pre.values()), max(suf.values())))
    return best


def test_criterion_06_ws_correctness():
    universe = [x for t in range(4) for x in itertools.product(range(2), repeat=t)]
    cases = mismatches = heuristic_low = 0
    for size in range(1, 6):
        for combo in itertools.combinations_with_replacement(universe, size):
            S = StringSample(combo)
            exact = ws_exhaustive(S).value
            cases += 1
            mismatches += exact != _brute_ws(combo)
            heuristic_low += ws_heuristic(S, seed=cases, restarts=2).value < exact
    extremes = []
    for m in (1, 3, 6):
        S = StringSample([()] * m)
        extremes.append(ws_exhaustive(S).value == m and ws_heuristic(S).value == m)
    for m in (2, 4, 5):
        S = StringSample([tuple(int(b) for b in format(i, f"0{m}b")) for i in range(m)])
        extremes.append(ws_exhaustive(S).value == 1 and ws_heuristic(S).value == 1)
    ok = mismatches == 0 and heuristic_low == 0 and all(extremes)
    report(6, ok, f"{cases} samples, {mismatches} mismatches, {heuristic_low} heuristic "
                  f"values below exact, extremes {'ok' if all(extremes) else 'failed'}")


def _scaled_into_ball(rng, k, n, p, r, radius_fraction):
    A = WeightedAutomaton.random(rng, Alphabet.of_size(k), n)
    c = r * radius_fraction / wfa_norm(A, p)
    return WeightedAutomaton(A.alphabet, c * A.alpha, c * A.beta, c * A.trans)


def test_criterion_07_growth_lemma():
    rng = np.random.default_rng(7)
    violations = 0
    for i in range(10_000):
        r = (0.5, 1.0, 2.0)[i % 3]
        p = (1, 2, math.inf)[int(rng.integers(0, 3))]
        k, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        A = _scaled_into_ball(rng, k, n, p, r, float(rng.uniform(0.2, 1.0)))
        B = _scaled_into_ball(rng, k, n, p, r, float(rng.uniform(0.2, 1.0)))
        x = tuple(rng.integers(0, k, size=int(rng.integers(0, 9))))
        t = len(x)
        fa, fb = evaluate(A, x), evaluate(B, x)
        diff = WeightedAutomaton(A.alphabet, A.alpha - B.alpha, A.beta - B.beta, A.trans - B.trans)
        first = abs(fa) <= r ** (t + 2) * (1 + 1e-9)
        second = abs(fa - fb) <= r ** (t + 1) * (t + 2) * wfa_norm(diff, p) * (1 + 1e-9)
        violations += (not first) + (not second)
    report(7, violations == 0, f"{violations} violations in 10000 draws")


def test_criterion_08_dominance():
    rng = np.random.default_rng(8)
    cfg = AscentConfig(restarts=4, steps=40)
    violations = 0
    for i in range(200):
        m = int(rng.integers(1, 6))
        S = random_sample(rng, m, max_len=3)
        r = (0.5, 1.0, 1.5)[i % 3]
        r1 = rademacher_Rpr(S, r, 1, "exact").value
        violations += r1 > bound_R1r(m, r, S.max_multiplicity).value + 1e-12
        w = ws_exhaustive(S)
        h2 = rademacher_Hpr_bound(S, w.witness, r, 2, "exact").value
        violations += h2 > r / math.sqrt(m) + 1e-12
        lower = rademacher_Anpr_lower(S, 2, 1, r, "exact", seed=i, config=cfg).value
        violations += lower > bound_RAnr(m, 2, 2, r, S.max_length).value + 1e-12
    report(8, violations == 0, f"{violations} violations over 200 fixtures")


def test_criterion_09_monte_carlo_consistency():
    within = 0
    for seed in range(100):
        rng = np.random.default_rng([9, seed])
        S = random_sample(rng, int(rng.integers(2, 11)))
        p = (1, 2, math.inf)[seed % 3]
        exact = rademacher_Rpr(S, 1.0, p, "exact").value
        mc = rademacher_Rpr(S, 1.0, p, "mc", draws=10_000, seed=seed)
        within += abs(mc.value - exact) <= 4 * mc.standard_error + 1e-15
    report(9, within >= 99, f"{within}/100 seeds within 4 standard errors")


def test_criterion_10_cm_lemma():
    t0 = time.perf_counter()
    A = geometric_pfa(2, 0.5)
    reps = [cm_wm_lemma_check(A, m, 200, seed=10) for m in (25, 50, 100)]
    lower_ok = all(r.lower_holds for r in reps)

    def exceed(vals, ses, noise):
        # points above 3x the grid median of |residual|, optionally beyond their own 3-sigma band
        med = float(np.median(np.abs(vals)))
        return sum(abs(v) > 3 * med + (3 * se if noise else 0.0) for v, se in zip(vals, ses))

    c_res = [r.C_residual for r in reps]
    w_res = [r.W_residual for r in reps]
    c_se = [r.C_residual_se for r in reps]
    w_se = [r.W_residual_se for r in reps]
    literal = exceed(c_res, c_se, False) + exceed(w_res, w_se, False)
    noisy = exceed(c_res, c_se, True) + exceed(w_res, w_se, True)
    elapsed = time.perf_counter() - t0
    ok = lower_ok and noisy == 0 and elapsed < 300
    report(10, ok, "C residuals " + ", ".join(f"{v:+.3f}+-{e:.3f}" for v, e in zip(c_res, c_se))
           + "; W residuals " + ", ".join(f"{v:+.3f}+-{e:.3f}" for v, e in zip(w_res, w_se))
           + f"; points over 3x median: {literal} raw, {noisy} beyond 3 se; {elapsed:.0f}s")


def _cli(args, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    res = subprocess.run([sys.executable, "-m", "wfabounds.cli", *args], capture_output=True,
                         env=env, check=False)
    return res.returncode, res.stdout


def test_criterion_11_determinism(tmp_path):
    geo = tmp_path / "geo.json"
    geo.write_text(dumps_automaton(geometric_pfa(2, 0.5)))
    sample = tmp_path / "s.txt"
    sample.write_text("a b\na\n<eps>\nb b a\na\n")
    big = tmp_path / "big.txt"
    big.write_text("a b a b a b a b\nb a b a\n" * 6)
    spec = tmp_path / "spec.txt"
    spec.write_text("experiment = inequality\nm_grid = 2 4\ntrials = 3\nseed = 5\n")
    growth = tmp_path / "growth.txt"
    growth.write_text("experiment = growth\nfamily = powerlaw\nm_grid = 50 500\ntrials = 3\n"
                      "seed = 2\n")
    commands = [
        ["sample", "--automaton", str(geo), "--m", "40", "--seed", "3"],
        ["rademacher", "--sample", str(sample), "--class", "R", "--mode", "mc", "--seed", "4",
         "--draws", "500"],
        ["rademacher", "--sample", str(sample), "--class", "H", "--p", "1", "--mode", "mc",
         "--seed", "4", "--draws", "500"],
        ["rademacher", "--sample", str(sample), "--class", "A", "--n", "2", "--mode", "mc",
         "--seed", "4", "--draws", "3", "--restarts", "3", "--steps", "10"],
        ["stats", "--sample", str(big), "--guard", "100", "--seed", "6"],
        ["experiment", "--spec", str(spec)],
        ["experiment", "--spec", str(spec), "--jobs", "3"],
        ["experiment", "--spec", str(growth)],
        ["check", "--seed", "8", "--m-grid", "2,4", "--trials", "2"],
    ]
    same = 0
    for i, cmd in enumerate(commands):
        a = _cli(cmd, hashseed=i)
        b = _cli(cmd, hashseed=i + 100)
        same += a[0] == 0 and a == b and len(a[1]) > 0
    # the job count must not change experiment output
    jobs_equal = _cli(commands[5], 0) == _cli(commands[6], 0)
    report(11, same == len(commands) and jobs_equal,
           f"{same}/{len(commands)} stochastic invocations byte-identical across runs; "
           f"jobs-invariant {jobs_equal}")
