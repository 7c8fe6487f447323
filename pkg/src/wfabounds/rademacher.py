"""Empirical Rademacher complexities of the three hypothesis classes.

* ``R_{p,r}`` (functions with ``||f||_p <= r``): computed exactly through the
  dual-norm identity ``(r/m) E ||sum_i sigma_i e_{x_i}||_q``.
* ``H_{p,r}`` (Schatten-Hankel balls): upper bound
  ``(r/m) E ||sum_i sigma_i e_{u_i} e_{v_i}^T||_{S,q}`` for a split of the sample.
* ``A_{n,p,r}`` (automaton-norm balls): lower bound by projected gradient
  ascent on the supremum, since no exact algorithm is known.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import comb

from .automaton import StringSample
from .errors import DomainError, NumericError, ResourceError
from .norms import HolderPair
from .sample_stats import SplitAssignment, ws_stat

EXACT = "exact-enumeration"
MONTE_CARLO = "monte-carlo"
EQUALS = "equals"
UPPER = "upper-bound"
LOWER = "lower-bound"

#: Largest sample size for brute-force enumeration of all sign vectors.
MAX_ENUM_M = 24
MAX_ENUM_M_MATRIX = 20
MAX_ENUM_M_ASCENT = 12
_BLOCK = 1 << 15


@dataclass(frozen=True)
class RademacherEstimate:
    value: float
    mode: str
    draws: int
    standard_error: float
    direction: str
    seed: int | None = None
    method: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _normalize_mode(mode: str) -> str:
    if mode in ("exact", EXACT):
        return EXACT
    if mode in ("mc", MONTE_CARLO):
        return MONTE_CARLO
    raise DomainError(f"unknown mode {mode!r}")


def _group_ids(keys):
    table = {}
    ids = np.array([table.setdefault(k, len(table)) for k in keys], dtype=np.int64)
    return ids, len(table)


def _sign_blocks(m: int, skip_first: bool = False):
    """Yield all ``2^m`` sign vectors (or the half with ``sigma_0 = +1``) in blocks."""
    total = 1 << (m - 1 if skip_first else m)
    shifts = np.arange(m - 1 if skip_first else m, dtype=np.int64)
    for start in range(0, total, _BLOCK):
        idx = np.arange(start, min(total, start + _BLOCK), dtype=np.int64)
        signs = 1 - 2 * ((idx[:, None] >> shifts) & 1)
        if skip_first:
            signs = np.hstack([np.ones((idx.size, 1), dtype=np.int64), signs])
        yield signs


def _vector_norms(T, q):
    if q == 2.0:
        return np.sqrt(np.sum(T * T, axis=1))
    if q == math.inf:
        return np.max(np.abs(T), axis=1)
    return np.sum(np.abs(T), axis=1)


def _grouped_sums(signs, ids, d):
    E = np.zeros((ids.size, d))
    E[np.arange(ids.size), ids] = 1.0
    return signs @ E


def _enumerate_mean(ids, d, q):
    m = ids.size
    parts = [float(np.sum(_vector_norms(_grouped_sums(s, ids, d), q)))
             for s in _sign_blocks(m)]
    return math.fsum(parts) / 2.0 ** m


def _sign_sum_pmf(s: int):
    """Values ``2b - s`` and probabilities of a sum of ``s`` Rademacher variables."""
    b = np.arange(s + 1)
    return 2 * b - s, comb(s, b) / 2.0 ** s


def _convolve_mean(mults, q):
    """``E ||T||_q`` where ``T_x`` are independent sign sums with multiplicities ``mults``."""
    if q == 1.0:
        return math.fsum(float(np.sum(np.abs(v) * pr)) for v, pr in map(_sign_sum_pmf, mults))
    if q == math.inf:
        top = max(mults)
        cdfs = []
        for s in mults:
            v, pr = _sign_sum_pmf(s)
            cdfs.append(np.array([pr[np.abs(v) <= t].sum() for t in range(top + 1)]))
        prod = np.prod(np.vstack(cdfs), axis=0)
        return math.fsum(1.0 - prod[t] for t in range(top))
    # q = 2: distribution of sum_x T_x^2 by convolution
    size = sum(s * s for s in mults) + 1
    dist = np.zeros(size)
    dist[0] = 1.0
    for s in mults:
        v, pr = _sign_sum_pmf(s)
        new = np.zeros(size)
        for val, p in zip(v, pr):
            sh = int(val * val)
            new[sh:] += p * dist[:size - sh]
        dist = new
    return math.fsum(dist * np.sqrt(np.arange(size)))


def _mc_norms(ids, d, q, draws, seed):
    rng = np.random.default_rng(seed)
    out = np.empty(draws)
    for start in range(0, draws, _BLOCK):
        b = min(draws, start + _BLOCK) - start
        signs = 1 - 2 * rng.integers(0, 2, size=(b, ids.size))
        out[start:start + b] = _vector_norms(_grouped_sums(signs, ids, d), q)
    return out


def _mc_estimate(samples, scale, draws, seed, direction):
    if draws < 2:
        raise DomainError("monte-carlo mode needs at least 2 draws")
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1)) / math.sqrt(draws)
    return RademacherEstimate(scale * mean, MONTE_CARLO, draws, scale * se, direction, seed)


def _vector_case(ids, d, r, m, q, mode, draws, seed, method, direction):
    if mode == EXACT:
        mults = np.bincount(ids, minlength=d).tolist()
        if method == "auto":
            method = "convolve" if max(mults) > 1 else "enumerate"
        if method == "enumerate":
            if m > MAX_ENUM_M:
                raise ResourceError(f"exact enumeration needs m <= {MAX_ENUM_M}, got {m}")
            mean = _enumerate_mean(ids, d, q)
        elif method == "convolve":
            mean = _convolve_mean(mults, q)
        else:
            raise DomainError(f"unknown method {method!r}")
        return RademacherEstimate(r * mean / m, EXACT, 2 ** m, 0.0, direction, None, method)
    samples = _mc_norms(ids, d, q, draws, seed)
    return _mc_estimate(samples, r / m, draws, seed, direction)


def rademacher_Rpr(S: StringSample, r: float, p=2, mode: str = "exact", draws: int = 10_000,
                   seed: int | None = 0, method: str = "auto") -> RademacherEstimate:
    """Empirical Rademacher complexity of ``R_{p,r}`` (an identity, not a bound).

    Exact mode averages over all sign vectors, either by enumerating them
    (``method="enumerate"``) or by combining the independent sign sums of the
    distinct strings (``method="convolve"``). ``"auto"`` convolves when some
    string repeats.
    """
    _check_r(r)
    hp = HolderPair.of(p)
    ids, d = _group_ids(S.strings)
    return _vector_case(ids, d, r, S.m, hp.q, _normalize_mode(mode), draws, seed, method, EQUALS)


def _check_r(r):
    if not (r >= 0 and math.isfinite(r)):
        raise DomainError(f"r must be finite and nonnegative, got {r}")


def _cell_ids(split: SplitAssignment):
    u_ids, nu = _group_ids(u for u, _ in split.pairs)
    v_ids, nv = _group_ids(v for _, v in split.pairs)
    return u_ids, nu, v_ids, nv


def _operator_norms(signs, u_ids, nu, v_ids, nv):
    b = signs.shape[0]
    R = np.zeros((b, nu, nv))
    for i in range(signs.shape[1]):
        R[:, u_ids[i], v_ids[i]] += signs[:, i]
    if min(nu, nv) == 1:
        return np.sqrt(np.sum(R * R, axis=(1, 2)))
    return np.linalg.norm(R, ord=2, axis=(1, 2))


def rademacher_Hpr_bound(S: StringSample, split: SplitAssignment | None = None, r: float = 1.0,
                         p=2, mode: str = "exact", draws: int = 10_000, seed: int | None = 0,
                         method: str = "auto") -> RademacherEstimate:
    """Upper bound on the empirical Rademacher complexity of ``H_{p,r}``, ``p in {1, 2}``.

    ``p = 2`` uses the Frobenius norm of the sign matrix, ``p = 1`` its
    operator norm. Without ``split``, the ``W_S`` witness is used.
    """
    _check_r(r)
    hp = HolderPair.of(p)
    if hp.p not in (1.0, 2.0):
        raise DomainError("the Schatten-Hankel estimator supports p = 1 and p = 2")
    if split is None:
        split = ws_stat(S, seed=seed or 0).witness
    if not split.is_split_of(S):
        raise DomainError("split is not a decomposition of the sample")
    mode = _normalize_mode(mode)
    m = S.m
    if hp.q == 2.0:
        # the Frobenius norm only sees the sign sum of each (prefix, suffix) cell
        ids, d = _group_ids(split.pairs)
        if mode == EXACT and method == "enumerate" and m > MAX_ENUM_M_MATRIX:
            raise ResourceError(f"exact enumeration needs m <= {MAX_ENUM_M_MATRIX}, got {m}")
        return _vector_case(ids, d, r, m, 2.0, mode, draws, seed, method, UPPER)
    u_ids, nu, v_ids, nv = _cell_ids(split)
    if mode == EXACT:
        if m > MAX_ENUM_M_MATRIX:
            raise ResourceError(f"exact enumeration needs m <= {MAX_ENUM_M_MATRIX}, got {m}")
        # the operator norm is even in sigma, so fix sigma_0 = +1
        parts = [float(np.sum(_operator_norms(s, u_ids, nu, v_ids, nv)))
                 for s in _sign_blocks(m, skip_first=True)]
        mean = math.fsum(parts) / 2.0 ** (m - 1)
        return RademacherEstimate(r * mean / m, EXACT, 2 ** m, 0.0, UPPER, None, "enumerate")
    rng = np.random.default_rng(seed)
    out = np.empty(draws)
    for start in range(0, draws, _BLOCK):
        b = min(draws, start + _BLOCK) - start
        signs = 1 - 2 * rng.integers(0, 2, size=(b, m))
        out[start:start + b] = _operator_norms(signs, u_ids, nu, v_ids, nv)
    return _mc_estimate(out, r / m, draws, seed, UPPER)


@dataclass(frozen=True)
class AscentConfig:
    restarts: int = 50
    steps: int = 200
    step_size: float = 0.1


def _vec_norm(x, p):
    return np.linalg.norm(x, ord=p, axis=-1)


def _induced_norms(M, q):
    if q == 1.0:
        return np.max(np.sum(np.abs(M), axis=-2), axis=-1)
    if q == math.inf:
        return np.max(np.sum(np.abs(M), axis=-1), axis=-1)
    return np.linalg.norm(M, ord=2, axis=(-2, -1))


def _shrink(x, norms, r):
    factor = np.where(norms > r, r / np.where(norms > 0, norms, 1.0), 1.0)
    return x * factor.reshape(factor.shape + (1,) * (x.ndim - factor.ndim))


def _project(alpha, beta, T, hp, r):
    return (_shrink(alpha, _vec_norm(alpha, hp.p), r),
            _shrink(beta, _vec_norm(beta, hp.q), r),
            _shrink(T, _induced_norms(T, hp.q), r))


class _Objective:
    """``sum_d w_d f_A(x_d)`` and its gradient, batched over restarts.

    Strings are padded to a common length with an extra identity symbol.
    """

    def __init__(self, strings, k, n):
        self.k, self.n = k, n
        self.L = max((len(x) for x in strings), default=0)
        self.sym = np.full((len(strings), self.L), k, dtype=np.int64)
        for d, x in enumerate(strings):
            self.sym[d, :len(x)] = x
        self.onehot = np.zeros((len(strings), self.L, k + 1))
        if self.L:
            np.put_along_axis(self.onehot, self.sym[:, :, None], 1.0, axis=2)
        self.onehot = self.onehot[:, :, :k]

    def __call__(self, w, alpha, beta, T, grad=True):
        R, n = alpha.shape[0], self.n
        full = np.concatenate([T, np.broadcast_to(np.eye(n), (R, 1, n, n))], axis=1)
        D = self.sym.shape[0]
        fwd = [np.broadcast_to(alpha[:, None, :], (R, D, n))]
        for s in range(self.L):
            mats = full[:, self.sym[:, s]]
            fwd.append(np.einsum("rdi,rdij->rdj", fwd[-1], mats))
        vals = np.einsum("rdi,ri->rd", fwd[-1], beta)
        obj = vals @ w
        if not grad:
            return obj, None
        bwd = [None] * (self.L + 1)
        bwd[self.L] = np.broadcast_to(beta[:, None, :], (R, D, n))
        for s in range(self.L - 1, -1, -1):
            mats = full[:, self.sym[:, s]]
            bwd[s] = np.einsum("rdij,rdj->rdi", mats, bwd[s + 1])
        g_alpha = np.einsum("rdi,d->ri", bwd[0], w)
        g_beta = np.einsum("rdi,d->ri", fwd[-1], w)
        g_T = np.zeros_like(T)
        for s in range(self.L):
            g_T += np.einsum("rdi,rdj,d,da->raij", fwd[s], bwd[s + 1], w, self.onehot[:, s])
        return obj, (g_alpha, g_beta, g_T)


def _random_ball(rng, shape, r, norm):
    x = rng.standard_normal(shape)
    nrm = norm(x)
    nrm = np.where(nrm > 0, nrm, 1.0)
    u = rng.random(nrm.shape)
    scale = r * u / nrm
    return x * scale.reshape(scale.shape + (1,) * (x.ndim - scale.ndim))


def _maximize(obj, w, n, k, hp, r, cfg, rng):
    R = cfg.restarts
    alpha = _random_ball(rng, (R, n), r, lambda x: _vec_norm(x, hp.p))
    beta = _random_ball(rng, (R, n), r, lambda x: _vec_norm(x, hp.q))
    T = _random_ball(rng, (R, k, n, n), r, lambda x: _induced_norms(x, hp.q))
    alpha, beta, T = _project(alpha, beta, T, hp, r)
    cur, grads = obj(w, alpha, beta, T)
    step = np.full(R, cfg.step_size)
    for _ in range(cfg.steps):
        ga, gb, gT = grads
        gnorm = np.sqrt(np.sum(ga ** 2, 1) + np.sum(gb ** 2, 1) + np.sum(gT ** 2, (1, 2, 3)))
        if not np.all(np.isfinite(gnorm)):
            raise NumericError("non-finite gradient in ascent; use r <= 1 or shorter strings")
        scale = (step * r / np.where(gnorm > 0, gnorm, 1.0))
        cand = _project(alpha + scale[:, None] * ga, beta + scale[:, None] * gb,
                        T + scale[:, None, None, None] * gT, hp, r)
        new, new_grads = obj(w, *cand)
        better = new > cur
        alpha = np.where(better[:, None], cand[0], alpha)
        beta = np.where(better[:, None], cand[1], beta)
        T = np.where(better[:, None, None, None], cand[2], T)
        cur = np.where(better, new, cur)
        grads = tuple(np.where(better.reshape((R,) + (1,) * (g.ndim - 1)), ng, g)
                      for g, ng in zip(grads, new_grads))
        step = np.where(better, step, step / 2)
    if not np.all(np.isfinite(cur)):
        raise NumericError("non-finite objective in ascent; use r <= 1 or shorter strings")
    return float(np.max(cur))


def rademacher_Anpr_lower(S: StringSample, n: int, p=1, r: float = 1.0, mode: str = "monte-carlo",
                          draws: int = 100, seed: int | None = 0,
                          config: AscentConfig | None = None) -> RademacherEstimate:
    """Lower-bound estimate of the empirical Rademacher complexity of ``A_{n,p,r}``.

    For each sign vector, the supremum of ``(1/m) sum_i sigma_i f_A(x_i)`` over
    the ball ``||A||_{p,q} <= r`` is approached by multi-start projected
    gradient ascent (normalised steps of ``step_size * r``, halved on failure).
    Every value found is attained by a feasible automaton, so it is below the
    true supremum.
    """
    _check_r(r)
    hp = HolderPair.of(p)
    if n < 1:
        raise DomainError("n must be at least 1")
    cfg = config or AscentConfig()
    mode = _normalize_mode(mode)
    if S.alphabet is not None:
        k = S.alphabet.k
    else:
        k = max((max(x) + 1 for x in S.strings if x), default=1)
    m = S.m
    ids, d = _group_ids(S.strings)
    distinct = [None] * d
    for x, i in zip(S.strings, ids):
        distinct[i] = x
    obj = _Objective(distinct, k, n)
    rng = np.random.default_rng(seed)

    def sup_for(signs):
        w = np.bincount(ids, weights=signs, minlength=d) / m
        if r == 0 or not np.any(w):
            return 0.0
        return _maximize(obj, w, n, k, hp, r, cfg, rng)

    if mode == EXACT:
        if m > MAX_ENUM_M_ASCENT:
            raise ResourceError(f"exact mode of the ascent estimator needs m <= {MAX_ENUM_M_ASCENT}")
        # negating alpha maps the class onto itself and flips the sign of f,
        # so sigma and -sigma have the same supremum
        vals = [sup_for(s.astype(float)) for block in _sign_blocks(m, skip_first=True)
                for s in block]
        return RademacherEstimate(math.fsum(vals) / len(vals), EXACT, 2 ** m, 0.0, LOWER, seed,
                                  "ascent")
    if draws < 2:
        raise DomainError("monte-carlo mode needs at least 2 draws")
    signs = 1 - 2 * rng.integers(0, 2, size=(draws, m))
    vals = np.array([sup_for(s.astype(float)) for s in signs])
    est = _mc_estimate(vals, 1.0, draws, seed, LOWER)
    return RademacherEstimate(est.value, est.mode, est.draws, est.standard_error, LOWER, seed,
                              "ascent")
