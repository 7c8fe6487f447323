"""Closed-form Rademacher and generalization bounds.

Every calculator returns a :class:`BoundReport` whose value is the sum of
named terms, each tagged with the result it instantiates. Natural
logarithms throughout. Unspecified ``O(sqrt(1/m))`` terms in the
distribution-dependent bounds are instantiated as ``kappa / sqrt(m)`` with a
caller-supplied ``kappa`` (default 0, which drops them) and a warning.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .automaton import WeightedAutomaton, derive_seed, halting_radius, sample_pfa, validate_pfa
from .errors import DomainError
from .norms import ENUM_GUARD, enumerate_levels, max_enumerable_length
from .sample_stats import ws_stat

#: ``(2/3)(1 + 4/log 2)``, the first constant of the matrix moment bound.
TROPP_C1 = (2.0 / 3.0) * (1.0 + 4.0 / math.log(2.0))
#: ``1 + 4/sqrt(2 log 2)``, the second constant of the matrix moment bound.
TROPP_C2 = 1.0 + 4.0 / math.sqrt(2.0 * math.log(2.0))

KAPPA_WARNING = "value depends on kappa, a stand-in for an unspecified O(sqrt(1/m)) constant"

ANCHOR_COVER = "A_{n,p,r}: covering-number bound"
ANCHOR_AN1 = "A_{n,p,1}: covering bound at eta=(L+2)/m"
ANCHOR_RPR = "R_{p,r}: dual-norm identity"
ANCHOR_R1R = "R_{1,r}: Massart bound with C_S"
ANCHOR_R2R = "R_{2,r}: Jensen / Khintchine-Kahane sandwich"
ANCHOR_H2R = "H_{2,r}: Frobenius bound"
ANCHOR_H1R = "H_{1,r}: matrix moment bound with W_S"
ANCHOR_DIST_R1R = "R_{1,r}: distribution bound with D_max"
ANCHOR_DIST_H1R = "H_{1,r}: distribution bound with D_max^v"
ANCHOR_CONF_EMP = "confidence term, empirical complexity"
ANCHOR_CONF_DIST = "confidence term, expected complexity"


@dataclass
class BoundReport:
    name: str
    terms: list
    inputs: dict
    warnings: list = field(default_factory=list)
    lower: float | None = None

    @property
    def value(self) -> float:
        return math.fsum(v for _, v, _ in self.terms)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "lower": self.lower,
                "terms": [{"name": n, "value": v, "anchor": a} for n, v, a in self.terms],
                "inputs": dict(self.inputs), "warnings": list(self.warnings)}

    def to_text(self) -> str:
        lines = [f"bound {self.name}", f"value {_fmt(self.value)}"]
        if self.lower is not None:
            lines.append(f"lower {_fmt(self.lower)}")
            lines.append(f"upper {_fmt(self.value)}")
        for n, v, a in self.terms:
            lines.append(f"term {n} {_fmt(v)} [{a}]")
        for k, v in self.inputs.items():
            lines.append(f"input {k} {_fmt(v)}")
        for w in self.warnings:
            lines.append(f"warning {w}")
        return "\n".join(lines) + "\n"

    def csv_header(self) -> list:
        return ["bound", "value", "lower"] + list(self.inputs) + [n for n, _, _ in self.terms]

    def csv_row(self) -> list:
        return ([self.name, _fmt(self.value), "" if self.lower is None else _fmt(self.lower)]
                + [_fmt(v) for v in self.inputs.values()] + [_fmt(v) for _, v, _ in self.terms])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header())
        w.writerow(self.csv_row())
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _require(cond, msg):
    if not cond:
        raise DomainError(msg)


def _check_common(m, r=None):
    _require(isinstance(m, (int, np.integer)) and m >= 1, f"m must be an integer >= 1, got {m}")
    if r is not None:
        _require(r >= 0 and math.isfinite(r), f"r must be finite and nonnegative, got {r}")


def _dim(n, k):
    _require(n >= 1 and k >= 1, "n and k must be at least 1")
    return n * (k * n + 2)


def covering_number_bound(eta: float, n: int, k: int, r: float, L: int) -> float:
    """Log of the l1 covering number bound ``r^d (2 + r^{L+1}(L+2)/eta)^d``, ``d = n(kn+2)``."""
    _require(eta > 0, f"eta must be positive, got {eta}")
    _require(r > 0, f"r must be positive, got {r}")
    d = _dim(n, k)
    log_r = math.log(r)
    inner = np.logaddexp(math.log(2.0), (L + 1) * log_r + math.log(L + 2) - math.log(eta))
    return float(d * (log_r + inner))


def _ranr_objective(log_eta, log_R, d, L, r, m):
    # eta + R sqrt(2 d log(2r + R (L+2) / eta) / m), R = r^{L+2}
    log_arg = np.logaddexp(math.log(2.0 * r), log_R + math.log(L + 2) - log_eta)
    # a covering by a single point makes the Massart term vanish
    log_arg = np.maximum(log_arg, 0.0)
    return np.exp(log_eta) + np.exp(log_R) * np.sqrt(2.0 * d * log_arg / m)


def bound_RAnr(m: int, n: int, k: int, r: float, L_S: int,
               eta_range=(1e-12, 1e12)) -> BoundReport:
    """Covering-number bound on the empirical Rademacher complexity of ``A_{n,p,r}``.

    The infimum over ``eta`` is searched on ``log eta``: a 100-point grid
    followed by bounded scalar refinement around the best grid point.
    """
    _check_common(m, r)
    _require(r > 0, "r must be positive")
    d = _dim(n, k)
    inputs = {"m": m, "n": n, "k": k, "r": float(r), "L_S": L_S}
    log_R = (L_S + 2) * math.log(r)
    if log_R > 700.0:
        return BoundReport("RAnr", [("eta", 0.0, ANCHOR_COVER), ("massart", math.inf, ANCHOR_COVER)],
                           inputs, [f"r^(L_S+2) overflows (log = {log_R:.6g}); bound is +inf"])
    lo, hi = math.log(eta_range[0]), math.log(eta_range[1])
    f = lambda t: float(_ranr_objective(t, log_R, d, L_S, r, m))
    grid = np.linspace(lo, hi, 100)
    vals = _ranr_objective(grid, log_R, d, L_S, r, m)
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    t = float(minimize_scalar(f, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-10}).x)
    if f(t) > vals[i]:
        t = grid[i]
    eta = math.exp(t)
    total = f(t)
    return BoundReport("RAnr", [("eta", eta, ANCHOR_COVER), ("massart", total - eta, ANCHOR_COVER)],
                       inputs)


def bound_An1(m: int, n: int, k: int, L: int) -> BoundReport:
    """``sqrt(2 n(kn+2) log(m+2) / m) + (L+2)/m``; pass ``L = L_S`` or ``L = L_m``."""
    _check_common(m)
    d = _dim(n, k)
    return BoundReport("An1", [("covering", math.sqrt(2.0 * d * math.log(m + 2) / m), ANCHOR_AN1),
                               ("length", (L + 2) / m, ANCHOR_AN1)],
                       {"m": m, "n": n, "k": k, "L": L})


def bound_R1r(m: int, r: float, C: int) -> BoundReport:
    """``r sqrt(2 C log(2m)) / m``."""
    _check_common(m, r)
    _require(1 <= C <= m, f"C must lie in [1, m], got {C}")
    return BoundReport("R1r", [("massart", r * math.sqrt(2.0 * C * math.log(2 * m)) / m, ANCHOR_R1R)],
                       {"m": m, "r": float(r), "C": C})


def bound_R2r(m: int, r: float) -> BoundReport:
    """Upper end ``r / sqrt(m)``; ``lower`` carries ``r / sqrt(2m)``."""
    _check_common(m, r)
    return BoundReport("R2r", [("jensen", r / math.sqrt(m), ANCHOR_R2R)],
                       {"m": m, "r": float(r)}, lower=r / math.sqrt(2.0 * m))


def tropp_moment_bound(M_op: float, nu: float, d: float) -> float:
    """Expected operator norm bound for a sum of independent centred random matrices."""
    _require(M_op >= 0 and nu >= 0, "M_op and nu must be nonnegative")
    _require(d >= 1, "d must be at least 1")
    L = math.log(d + 1.0)
    return TROPP_C1 * M_op * L + TROPP_C2 * math.sqrt(2.0 * nu * L)


def bound_H1r(m: int, r: float, W: int) -> BoundReport:
    """``(r/m) [c1 log(2m+1) + c2 sqrt(2 W log(2m+1))]``."""
    _check_common(m, r)
    _require(1 <= W <= m, f"W must lie in [1, m], got {W}")
    L = math.log(2 * m + 1)
    return BoundReport("H1r", [("moment-log", r / m * TROPP_C1 * L, ANCHOR_H1R),
                               ("moment-sqrt", r / m * TROPP_C2 * math.sqrt(2.0 * W * L), ANCHOR_H1R)],
                       {"m": m, "r": float(r), "W": W})


def bound_H2r(m: int, r: float) -> BoundReport:
    _check_common(m, r)
    return BoundReport("H2r", [("frobenius", r / math.sqrt(m), ANCHOR_H2R)], {"m": m, "r": float(r)})


def _kappa_warn(kappa):
    _require(kappa >= 0, "kappa must be nonnegative")
    return [KAPPA_WARNING] if kappa > 0 else []


def bound_dist_R1r(m: int, r: float, D_max: float, kappa: float = 0.0) -> BoundReport:
    """``(r/sqrt(m)) sqrt(2 (D_max + kappa/sqrt(m)) log(2m))``."""
    _check_common(m, r)
    _require(0 <= D_max <= 1, "D_max must lie in [0, 1]")
    warn = _kappa_warn(kappa)
    val = r / math.sqrt(m) * math.sqrt(2.0 * (D_max + kappa / math.sqrt(m)) * math.log(2 * m))
    return BoundReport("dist_R1r", [("massart", val, ANCHOR_DIST_R1R)],
                       {"m": m, "r": float(r), "D_max": float(D_max), "kappa": float(kappa)}, warn)


def bound_dist_H1r(m: int, r: float, D_max_vee: float, kappa: float = 0.0) -> BoundReport:
    """``c1 r log(2m+1)/m + sqrt(2) c2 (r/sqrt(m)) sqrt((D_max^v + kappa/sqrt(m)) log(2m+1))``."""
    _check_common(m, r)
    _require(D_max_vee >= 0, "D_max^v must be nonnegative")
    warn = _kappa_warn(kappa)
    L = math.log(2 * m + 1)
    t1 = TROPP_C1 * r * L / m
    t2 = math.sqrt(2.0) * TROPP_C2 * r / math.sqrt(m) * math.sqrt((D_max_vee + kappa / math.sqrt(m)) * L)
    return BoundReport("dist_H1r", [("moment-log", t1, ANCHOR_DIST_H1R),
                                    ("moment-sqrt", t2, ANCHOR_DIST_H1R)],
                       {"m": m, "r": float(r), "D_max_vee": float(D_max_vee), "kappa": float(kappa)},
                       warn)


@dataclass(frozen=True)
class DistParams:
    """Truncated estimates of ``D_max`` and ``D_max^v`` for a PFA."""

    D_max: float
    D_max_exact: bool
    argmax: tuple
    D_max_vee: float
    D_max_vee_upper: float
    tail_mass: float
    length: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        return d


def dist_params(A: WeightedAutomaton, L: int, guard: int = ENUM_GUARD) -> DistParams:
    """``D_max`` and ``D_max^v`` of the distribution of a halting PFA.

    Strings up to length ``L`` are enumerated. ``D_max`` is exact when the
    mass of longer strings is at most the best value found. ``D_max^v`` is a
    lower bound (inner sums truncated at ``L``) and ``D_max_vee_upper`` adds
    ``tail_mass / (L + 2)``, an upper bound on everything left out.
    """
    validate_pfa(A)
    _require(halting_radius(A) < 1.0, "PFA does not halt with probability 1")
    _require(L >= 0, "L must be nonnegative")
    n = A.n
    S = A.trans.sum(axis=0)
    I_S = np.eye(n) - S
    # exact mass of strings longer than L
    tail = float(A.alpha @ np.linalg.matrix_power(S, L + 1) @ np.linalg.solve(I_S, A.beta))
    tail = max(tail, 0.0)
    # w[l] = sum_t S^t beta / (l + t + 1), z[l] = sum_t alpha^T S^t / (l + t + 1), t <= L
    Sb = [A.beta]
    aS = [A.alpha]
    for _ in range(L):
        Sb.append(S @ Sb[-1])
        aS.append(aS[-1] @ S)
    Sb, aS = np.array(Sb), np.array(aS)
    t = np.arange(L + 1)
    best, best_x, vee = -1.0, (), 0.0
    rev = WeightedAutomaton(A.alphabet, A.beta, A.alpha, np.transpose(A.trans, (0, 2, 1)))
    fwd = dict(enumerate_levels(A, L, guard))
    bwd = dict(enumerate_levels(rev, L, guard))
    for ell in range(L + 1):
        F, B = fwd[ell], bwd[ell]
        weights = 1.0 / (ell + t + 1.0)
        w = weights @ Sb
        z = weights @ aS
        vals = F @ A.beta
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = float(vals[j])
            best_x = _index_to_string(j, ell, A.k)
        vee = max(vee, float(np.max(F @ w)), float(np.max(B @ z)))
    return DistParams(best, tail <= best, best_x, vee, vee + tail / (L + 2), tail, L)


def _index_to_string(j, ell, k):
    digits = []
    for _ in range(ell):
        j, d = divmod(j, k)
        digits.append(d)
    return tuple(reversed(digits))


@dataclass(frozen=True)
class LemmaCheck:
    """Monte-Carlo ``C_m``, ``W_m`` against ``m D_max`` and ``m D_max^v``."""

    m: int
    trials: int
    C_m: float
    C_m_se: float
    W_m: float
    W_m_se: float
    D_max: float
    D_max_vee: float
    lower_holds: bool
    C_residual: float
    W_residual: float
    C_residual_se: float
    W_residual_se: float

    def to_dict(self) -> dict:
        return asdict(self)


def cm_wm_lemma_check(A: WeightedAutomaton, m: int, trials: int, seed: int, L: int | None = None,
                      restarts: int = 4, params: DistParams | None = None,
                      ws_guard: int = 100_000) -> LemmaCheck:
    """Estimate ``C_m = E[C_S]`` and ``W_m = E[W_S]`` from ``trials`` samples of size ``m``.

    Checks ``C_m >= m D_max - 3 se`` and reports the residuals
    ``(C_m - m D_max)/sqrt(m)`` and ``(W_m - m D_max^v)/sqrt(m)``. ``W_S`` is
    exact when enumerable and a heuristic upper bound otherwise.
    """
    _require(trials >= 2, "need at least 2 trials for a standard error")
    dp = params or dist_params(A, min(30, max_enumerable_length(A.k)) if L is None else L)
    cs, ws = [], []
    for t in range(trials):
        s = derive_seed(seed, m, t)
        S = sample_pfa(A, m, s)
        cs.append(S.max_multiplicity)
        ws.append(ws_stat(S, seed=s, restarts=restarts, guard=ws_guard).value)
    cs, ws = np.array(cs, dtype=float), np.array(ws, dtype=float)
    C_m, W_m = float(cs.mean()), float(ws.mean())
    C_se = float(cs.std(ddof=1)) / math.sqrt(trials)
    W_se = float(ws.std(ddof=1)) / math.sqrt(trials)
    return LemmaCheck(m, trials, C_m, C_se, W_m, W_se, dp.D_max, dp.D_max_vee,
                      C_m >= m * dp.D_max - 3.0 * C_se,
                      (C_m - m * dp.D_max) / math.sqrt(m), (W_m - m * dp.D_max_vee) / math.sqrt(m),
                      C_se / math.sqrt(m), W_se / math.sqrt(m))


CLASSES = ("A", "R1r", "R2r", "H1r", "H2r")


@dataclass(frozen=True)
class BoundQuery:
    """Inputs of a generalization bound.

    ``cls`` is one of ``A`` (``A_{n,p,r}``), ``R1r``, ``R2r``, ``H1r``, ``H2r``.
    Populate the sample statistics (``L_S``, ``C_S``, ``W_S``) for the
    empirical bounds or the distribution statistics (``L_m``, ``D_max``,
    ``D_max_vee``) for the expected ones; ``R2r`` and ``H2r`` need neither.
    """

    cls: str
    m: int
    r: float = 1.0
    mu: float = 1.0
    M: float = 1.0
    delta: float = 0.05
    n: int | None = None
    k: int | None = None
    p: float = 1.0
    L_S: int | None = None
    C_S: int | None = None
    W_S: int | None = None
    L_m: float | None = None
    D_max: float | None = None
    D_max_vee: float | None = None
    kappa: float = 0.0

    def __post_init__(self):
        _require(self.cls in CLASSES, f"class must be one of {CLASSES}, got {self.cls!r}")
        _check_common(self.m, self.r)
        _require(0 < self.delta < 1, f"delta must lie in (0, 1), got {self.delta}")
        _require(self.mu >= 0 and self.M >= 0, "mu and M must be nonnegative")
        if self.sample_stats and self.dist_stats:
            raise DomainError("populate either sample statistics or distribution statistics, not both")

    @property
    def sample_stats(self) -> bool:
        return any(v is not None for v in (self.L_S, self.C_S, self.W_S))

    @property
    def dist_stats(self) -> bool:
        return any(v is not None for v in (self.L_m, self.D_max, self.D_max_vee))

    @property
    def empirical(self) -> bool:
        return self.sample_stats


def _need(q: BoundQuery, name: str):
    v = getattr(q, name)
    if v is None:
        raise DomainError(f"class {q.cls} needs statistic {name}")
    return v


def generalization_bound(q: BoundQuery) -> BoundReport:
    """Everything to the right of the empirical loss in the generalization bound for ``q``."""
    m, mu, r = q.m, q.mu, q.r
    inputs = {k: v for k, v in asdict(q).items() if v is not None}
    warnings = []
    if q.empirical:
        conf = ("confidence", 3.0 * q.M * math.sqrt(math.log(2.0 / q.delta) / (2.0 * m)),
                ANCHOR_CONF_EMP)
    else:
        conf = ("confidence", q.M * math.sqrt(math.log(1.0 / q.delta) / (2.0 * m)), ANCHOR_CONF_DIST)

    if q.cls == "A":
        n, k = _need(q, "n"), _need(q, "k")
        L = _need(q, "L_S") if q.empirical else _need(q, "L_m")
        if r == 1.0:
            an1 = bound_An1(m, n, k, L)
            terms = [(f"2mu*{name}", 2.0 * mu * v, a) for name, v, a in an1.terms]
        else:
            _require(q.empirical, "A_{n,p,r} with r != 1 is only available with sample statistics")
            rep = bound_RAnr(m, n, k, r, L)
            terms = [(f"2mu*{name}", 2.0 * mu * v, a) for name, v, a in rep.terms]
            warnings.extend(rep.warnings)
            warnings.append("assembled from the covering-number bound for general r")
    elif q.cls == "R1r":
        if q.empirical:
            rep = bound_R1r(m, r, _need(q, "C_S"))
        else:
            rep = bound_dist_R1r(m, r, _need(q, "D_max"), q.kappa)
            warnings.extend(rep.warnings)
        terms = [(f"2mu*{name}", 2.0 * mu * v, a) for name, v, a in rep.terms]
    elif q.cls == "H1r":
        if q.empirical:
            rep = bound_H1r(m, r, _need(q, "W_S"))
        else:
            rep = bound_dist_H1r(m, r, _need(q, "D_max_vee"), q.kappa)
            warnings.extend(rep.warnings)
        terms = [(f"2mu*{name}", 2.0 * mu * v, a) for name, v, a in rep.terms]
    else:
        _require(not q.empirical, f"class {q.cls} has no sample-statistic variant")
        rep = bound_R2r(m, r) if q.cls == "R2r" else bound_H2r(m, r)
        terms = [(f"2mu*{name}", 2.0 * mu * v, a) for name, v, a in rep.terms]
    variant = "empirical" if q.empirical else "expected"
    return BoundReport(f"generalization-{q.cls}-{variant}", terms + [conf], inputs, warnings)
