"""Automaton norms ``||A||_{p,q}`` and ``l_p`` norms of rational functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .automaton import WeightedAutomaton
from .errors import ConditioningError, DomainError, ResourceError
from .linalg import DENSE_LIMIT, kron_sum, kron_sum_operator, spectral_radius

#: Default cap on the number of strings enumerated by truncated sums.
ENUM_GUARD = 2_000_000

EXACT = "exact"
TRUNCATED = "truncated-lower-bound"


def _parse_p(p) -> float:
    if isinstance(p, str):
        p = p.strip().lower()
        p = math.inf if p in ("inf", "infinity", "oo") else float(p)
    return float(p)


@dataclass(frozen=True)
class HolderPair:
    """Exponents ``p, q`` with ``1/p + 1/q = 1``, restricted to ``{1, 2, inf}``."""

    p: float
    q: float

    @classmethod
    def of(cls, p) -> "HolderPair":
        p = _parse_p(p)
        conj = {1.0: math.inf, 2.0: 2.0, math.inf: 1.0}
        if p not in conj:
            raise DomainError(f"p must be 1, 2 or inf, got {p}")
        return cls(p, conj[p])


SUPPORTED_PAIRS = tuple(HolderPair.of(p) for p in (1, 2, math.inf))


@dataclass(frozen=True)
class FunctionNormResult:
    """Value of a function norm, exact or a lower bound from a truncated sum.

    For truncated results ``tail_bound`` (when known) bounds the omitted
    part: ``sum_{|x| > L} |f(x)|^p`` for finite ``p`` and
    ``sup_{|x| > L} |f(x)|`` for ``p = inf``.
    """

    value: float
    status: str
    length: int | None = None
    tail_bound: float | None = None
    spectral_radius: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status, "length": self.length,
                "tail_bound": self.tail_bound, "spectral_radius": self.spectral_radius}


def induced_matrix_norm(M, q) -> float:
    """Operator norm of ``M`` induced by the vector ``q``-norm, ``q in {1, 2, inf}``."""
    q = _parse_p(q)
    if q not in (1.0, 2.0, math.inf):
        raise DomainError(f"induced norms are only supported for q in {{1, 2, inf}}, got {q}")
    M = np.asarray(M, dtype=float)
    return float(np.linalg.norm(M, ord=q if q != math.inf else np.inf))


def wfa_norm(A: WeightedAutomaton, p=1) -> float:
    """``max(||alpha||_p, ||beta||_q, max_a ||A_a||_q)`` for the Holder pair of ``p``."""
    hp = p if isinstance(p, HolderPair) else HolderPair.of(p)
    parts = [float(np.linalg.norm(A.alpha, hp.p)), float(np.linalg.norm(A.beta, hp.q))]
    parts += [induced_matrix_norm(M, hp.q) for M in A.trans]
    return max(parts)


def in_class_A(A: WeightedAutomaton, p, r: float) -> bool:
    return wfa_norm(A, p) <= r


def enumerate_levels(A: WeightedAutomaton, L: int, guard: int = ENUM_GUARD):
    """Yield ``(t, F_t)`` for ``t = 0..L`` where row ``i`` of ``F_t`` is ``alpha^T A_x``.

    Strings of each length are listed in lexicographic index order.
    """
    total = sum(A.k ** t for t in range(L + 1))
    if total > guard:
        raise ResourceError(f"{total} strings up to length {L} exceed the guard of {guard}")
    F = A.alpha[None, :]
    for t in range(L + 1):
        yield t, F
        if t < L:
            F = np.einsum("um,amj->uaj", F, A.trans).reshape(-1, A.n)


def enumerate_values(A: WeightedAutomaton, L: int, guard: int = ENUM_GUARD):
    """``f_A`` on every string of length ``<= L``, grouped by length."""
    return [F @ A.beta for _, F in enumerate_levels(A, L, guard)]


def _product_tail(A: WeightedAutomaton, p: float, L: int) -> float | None:
    # |f(x)| <= ||alpha||_p' ||beta||_q' prod_i ||A_{x_i}||_q' for each Holder pair (p', q')
    best = None
    for hp in SUPPORTED_PAIRS:
        c = float(np.linalg.norm(A.alpha, hp.p) * np.linalg.norm(A.beta, hp.q))
        g = np.array([induced_matrix_norm(M, hp.q) for M in A.trans])
        if p == math.inf:
            top = float(g.max())
            tail = c * top ** (L + 1) if top < 1.0 else None
        else:
            s = float(np.sum(g ** p))
            tail = c ** p * s ** (L + 1) / (1.0 - s) if s < 1.0 else None
        if tail is not None and (best is None or tail < best):
            best = tail
    return best


def _kron_tail(A: WeightedAutomaton, L: int, max_period: int = 1000) -> float | None:
    """Bound on ``sum_{|x| > L} f(x)^2`` from powers of ``sum_a A_a (x) A_a``."""
    if A.n * A.n > DENSE_LIMIT:
        return None
    M = kron_sum(A.trans)
    if spectral_radius(M) >= 1.0:
        return None
    u = np.kron(A.alpha, A.alpha)
    w_norm = float(np.linalg.norm(A.beta)) ** 2
    # find a period T with ||M^T|| < 1
    P = np.eye(M.shape[0])
    theta = None
    for T in range(1, max_period + 1):
        P = P @ M
        theta = np.linalg.norm(P, 2)
        if theta < 1.0:
            break
    else:
        return None
    row = u @ np.linalg.matrix_power(M, L + 1)
    acc = 0.0
    for _ in range(T):
        acc += float(np.linalg.norm(row))
        row = row @ M
    return acc * w_norm / (1.0 - theta)


def lp_norm_truncated(A: WeightedAutomaton, p, L: int, guard: int = ENUM_GUARD) -> FunctionNormResult:
    """``(sum_{|x| <= L} |f(x)|^p)^(1/p)`` (or the max for ``p = inf``); a lower bound."""
    p = _parse_p(p)
    if not p >= 1.0:
        raise DomainError(f"p must be in [1, inf], got {p}")
    values = enumerate_values(A, L, guard)
    if p == math.inf:
        value = max(float(np.max(np.abs(v))) for v in values)
    else:
        total = math.fsum(float(np.sum(np.abs(v) ** p)) for v in values)
        value = total ** (1.0 / p)
    tail = _product_tail(A, p, L)
    if p == 2.0:
        kt = _kron_tail(A, L)
        if kt is not None:
            tail = kt if tail is None else min(tail, kt)
    return FunctionNormResult(value, TRUNCATED, L, None if tail is None else float(tail))


def max_enumerable_length(k: int, guard: int = ENUM_GUARD) -> int:
    """Largest ``L`` such that all strings of length ``<= L`` over ``k`` symbols fit ``guard``."""
    L, total = 0, 1
    while total + k ** (L + 1) <= guard and L < 10_000:
        L += 1
        total += k ** L
    return L


def l2_norm_squared(A: WeightedAutomaton, fallback_length: int | None = None,
                    guard: int = ENUM_GUARD) -> FunctionNormResult:
    """``||f_A||_2^2``.

    Exact when ``rho(sum_a A_a (x) A_a) < 1`` via
    ``(alpha (x) alpha)^T (I - M)^{-1} (beta (x) beta)``. Otherwise the squared
    truncated sum up to ``fallback_length`` (default: 20, or less if the
    enumeration would exceed ``guard``) is returned as a lower bound.
    """
    nn = A.n * A.n
    dense = nn <= DENSE_LIMIT
    M = kron_sum(A.trans) if dense else kron_sum_operator(A.trans)
    rho = spectral_radius(M)
    if rho >= 1.0:
        if fallback_length is None:
            fallback_length = min(20, max_enumerable_length(A.k, guard))
        trunc = lp_norm_truncated(A, 2, fallback_length, guard)
        return FunctionNormResult(trunc.value ** 2, TRUNCATED, fallback_length,
                                  trunc.tail_bound, rho)
    u = np.kron(A.alpha, A.alpha)
    w = np.kron(A.beta, A.beta)
    if dense:
        I_M = np.eye(nn) - M
        if np.linalg.cond(I_M) > 1e12:
            raise ConditioningError("I - sum_a A_a (x) A_a is nearly singular")
        y = np.linalg.solve(I_M, w)
    else:
        op = LinearOperator((nn, nn), matvec=lambda v: v - M.matvec(v), dtype=float)
        y, info = gmres(op, w, rtol=1e-12, maxiter=10_000)
        if info != 0:
            raise ConditioningError(f"GMRES failed to converge (info={info})")
    value = float(u @ y)
    if not np.isfinite(value):
        raise ConditioningError("non-finite l2 norm")
    return FunctionNormResult(max(value, 0.0), EXACT, None, None, rho)


class BoundednessCertificate(NamedTuple):
    bounded: bool
    spectral_radius: float


def hankel_bounded(A: WeightedAutomaton) -> BoundednessCertificate:
    """Whether the Hankel operator of ``f_A`` is bounded, by the Kronecker criterion.

    ``rho(sum_a A_a (x) A_a) < 1`` is sufficient for ``||f_A||_2 < inf``;
    automata failing it are reported as not bounded.
    """
    M = kron_sum(A.trans) if A.n * A.n <= DENSE_LIMIT else kron_sum_operator(A.trans)
    rho = spectral_radius(M)
    return BoundednessCertificate(bool(rho < 1.0), rho)
