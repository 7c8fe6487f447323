"""Hankel singular values of rational functions.

The reachability Gramian ``P = sum_x A_x beta beta^T A_x^T`` and the
observability Gramian ``Q = sum_x A_x^T alpha alpha^T A_x`` are the Gram
matrices of the suffix and prefix factors of the Hankel matrix, so the
Hankel singular values are the square roots of the eigenvalues of ``PQ``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .automaton import WeightedAutomaton, evaluate
from .errors import ConditioningError, DomainError, ResourceError
from .linalg import DENSE_LIMIT, kron_sum
from .norms import ENUM_GUARD, _parse_p, enumerate_levels, hankel_bounded

#: Cap on the number of entries of a dense truncated Hankel block.
DENSE_GUARD = 250_000
RESIDUAL_TOL = 1e-10


def _stein_terms(mats, X):
    return np.einsum("aij,jk,alk->il", mats, X, mats)


def _fixed_point(mats, C, maxiter=100_000):
    X = C.copy()
    for _ in range(maxiter):
        X_new = C + _stein_terms(mats, X)
        if np.max(np.abs(X_new - X)) <= 1e-15 * max(1.0, np.max(np.abs(X_new))):
            return X_new
        X = X_new
    raise ConditioningError("Gramian fixed-point iteration did not converge")


def _solve_gramian(mats, C):
    n = C.shape[0]
    if n * n <= DENSE_LIMIT:
        I_M = np.eye(n * n) - kron_sum(mats)
        if np.linalg.cond(I_M) > 1e12:
            raise ConditioningError("Gramian linear system is nearly singular")
        X = np.linalg.solve(I_M, C.ravel()).reshape(n, n)
    else:
        X = _fixed_point(mats, C)
    return (X + X.T) / 2


def gramian_residuals(A: WeightedAutomaton, P, Q) -> tuple[float, float]:
    """Max-entry residuals of the two fixed-point equations."""
    transT = np.transpose(A.trans, (0, 2, 1))
    rp = P - np.outer(A.beta, A.beta) - _stein_terms(A.trans, P)
    rq = Q - np.outer(A.alpha, A.alpha) - _stein_terms(transT, Q)
    return float(np.max(np.abs(rp))), float(np.max(np.abs(rq)))


def gramians(A: WeightedAutomaton):
    """Solve ``P = bb^T + sum_a A_a P A_a^T`` and ``Q = aa^T + sum_a A_a^T Q A_a``."""
    cert = hankel_bounded(A)
    if not cert.bounded:
        raise DomainError(
            f"Hankel operator not certified bounded (spectral radius {cert.spectral_radius:.6g} >= 1); "
            "it is bounded only when f has finite l2 norm")
    P = _solve_gramian(A.trans, np.outer(A.beta, A.beta))
    Q = _solve_gramian(np.transpose(A.trans, (0, 2, 1)), np.outer(A.alpha, A.alpha))
    res = gramian_residuals(A, P, Q)
    scale = max(1.0, float(np.max(np.abs(P))), float(np.max(np.abs(Q))))
    if max(res) > RESIDUAL_TOL * scale:
        raise ConditioningError(f"Gramian residuals {res} above tolerance")
    return P, Q


def _psd_factor(G):
    w, V = np.linalg.eigh((G + G.T) / 2)
    return V * np.sqrt(np.clip(w, 0.0, None))


def singular_values_from_grams(P, Q) -> np.ndarray:
    """Square roots of the eigenvalues of ``PQ`` via the square-root method."""
    Lp, Lq = _psd_factor(P), _psd_factor(Q)
    s = np.linalg.svd(Lq.T @ Lp, compute_uv=False)
    return np.sort(s)[::-1]


@dataclass(frozen=True, eq=False)
class HankelSpectrum:
    singular_values: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    numerical_rank: int
    residuals: tuple

    def to_dict(self) -> dict:
        return {"singular_values": [float(s) for s in self.singular_values],
                "numerical_rank": self.numerical_rank,
                "gramian_residuals": list(self.residuals)}


def numerical_rank(s, rtol: float = 1e-9) -> int:
    s = np.asarray(s)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def hankel_singular_values(A: WeightedAutomaton) -> HankelSpectrum:
    P, Q = gramians(A)
    s = singular_values_from_grams(P, Q)
    return HankelSpectrum(s, P, Q, numerical_rank(s), gramian_residuals(A, P, Q))


def schatten_hankel_norm(A: WeightedAutomaton, p=1) -> float:
    """Schatten ``p``-norm of the Hankel operator of ``f_A``."""
    p = _parse_p(p)
    if not p >= 1.0:
        raise DomainError(f"p must be in [1, inf], got {p}")
    s = hankel_singular_values(A).singular_values
    return float(np.linalg.norm(s, p))


def all_strings(k: int, L: int):
    """Every string of length ``<= L`` over ``range(k)``, shortlex order."""
    for t in range(L + 1):
        yield from itertools.product(range(k), repeat=t)


@dataclass(frozen=True, eq=False)
class TruncatedHankel:
    prefixes: list
    suffixes: list
    matrix: np.ndarray


def truncated_hankel(A: WeightedAutomaton, L_p: int, L_s: int,
                     guard: int = DENSE_GUARD) -> TruncatedHankel:
    """Dense block ``H[u, v] = f(uv)`` for ``|u| <= L_p``, ``|v| <= L_s``, entry by entry."""
    n_p = sum(A.k ** t for t in range(L_p + 1))
    n_s = sum(A.k ** t for t in range(L_s + 1))
    if n_p * n_s > guard:
        raise ResourceError(f"{n_p} x {n_s} Hankel block exceeds the guard of {guard} entries")
    prefixes = list(all_strings(A.k, L_p))
    suffixes = list(all_strings(A.k, L_s))
    H = np.array([[evaluate(A, u + v) for v in suffixes] for u in prefixes])
    return TruncatedHankel(prefixes, suffixes, H)


def _level_gram(mats, C, L):
    total = C.copy()
    X = C
    for _ in range(L):
        X = _stein_terms(mats, X)
        total = total + X
    return total


def truncated_hankel_svd(A: WeightedAutomaton, L_p: int, L_s: int | None = None,
                         method: str = "auto", guard: int = DENSE_GUARD,
                         enum_guard: int = ENUM_GUARD) -> np.ndarray:
    """Singular values of the Hankel block over prefixes ``<= L_p`` and suffixes ``<= L_s``.

    ``method`` selects how the same finite block is handled:

    ``dense``
        fill every entry with :func:`evaluate` and take its SVD;
    ``factored``
        enumerate prefix rows ``alpha^T A_u`` and suffix columns ``A_v beta``
        and take the SVD of their product through two QR factorisations;
    ``gram``
        accumulate the Gram matrices of the two factors length by length
        (finite sums, no enumeration), which reaches cutoffs where the block
        itself would not fit in memory.

    ``auto`` picks the first one whose size guard is met. The dense route
    returns ``min(rows, cols)`` values; the others return ``n`` values (the
    rest are zero by the rank bound).
    """
    L_s = L_p if L_s is None else L_s
    n_p = sum(A.k ** t for t in range(L_p + 1))
    n_s = sum(A.k ** t for t in range(L_s + 1))
    if method == "auto":
        if n_p * n_s <= guard:
            method = "dense"
        elif max(n_p, n_s) <= enum_guard:
            method = "factored"
        else:
            method = "gram"
    if method == "dense":
        H = truncated_hankel(A, L_p, L_s, guard).matrix
        return np.linalg.svd(H, compute_uv=False)
    if method == "factored":
        F = np.vstack([Ft for _, Ft in enumerate_levels(A, L_p, enum_guard)])
        transT = np.transpose(A.trans, (0, 2, 1))
        rev = WeightedAutomaton(A.alphabet, A.beta, A.alpha, transT)
        B = np.vstack([Bt for _, Bt in enumerate_levels(rev, L_s, enum_guard)])
        R1 = np.linalg.qr(F, mode="r")
        R2 = np.linalg.qr(B, mode="r")
        s = np.linalg.svd(R1 @ R2.T, compute_uv=False)
        return np.sort(s)[::-1]
    if method == "gram":
        Qt = _level_gram(np.transpose(A.trans, (0, 2, 1)), np.outer(A.alpha, A.alpha), L_p)
        Pt = _level_gram(A.trans, np.outer(A.beta, A.beta), L_s)
        return singular_values_from_grams(Pt, Qt)
    raise DomainError(f"unknown method {method!r}")
