"""Weighted finite automata over the reals, string samples, DFAs and PFAs.

Strings are tuples of symbol indices. Anywhere a string is accepted, a
sequence of tokens (for instance the Python string ``"ab"`` over single
character symbols) is also accepted and encoded through the alphabet.
"""

from __future__ import annotations

import string as _string
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConditioningError, DomainError, ResourceError
from .linalg import spectral_radius

#: Largest condition number accepted by :func:`conjugate`.
MAX_CONDITION = 1e12
#: Tolerance on PFA row sums and probability vectors.
PFA_TOL = 1e-9

Str = tuple


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free list of symbol tokens."""

    symbols: tuple

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise DomainError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise DomainError(f"duplicate symbols in alphabet {symbols}")
        if any(not s or any(c.isspace() for c in s) for s in symbols):
            raise DomainError("symbols must be non-empty and contain no whitespace")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def of_size(cls, k: int) -> "Alphabet":
        """Alphabet ``a, b, c, ...`` (or ``s0, s1, ...`` beyond 26 symbols)."""
        if k < 1:
            raise DomainError("alphabet size must be at least 1")
        if k <= 26:
            return cls(tuple(_string.ascii_lowercase[:k]))
        return cls(tuple(f"s{i}" for i in range(k)))

    @property
    def k(self) -> int:
        return len(self.symbols)

    def index(self, token) -> int:
        try:
            return self._index[str(token)]
        except KeyError:
            raise DomainError(f"symbol {token!r} not in alphabet {self.symbols}") from None

    def encode(self, x) -> Str:
        """Convert a token sequence or an index sequence to a tuple of indices."""
        out = []
        for s in x:
            if isinstance(s, (int, np.integer)) and not isinstance(s, bool):
                if not 0 <= s < self.k:
                    raise DomainError(f"symbol index {s} out of range for k={self.k}")
                out.append(int(s))
            else:
                out.append(self.index(s))
        return tuple(out)

    def decode(self, x: Str) -> tuple:
        return tuple(self.symbols[i] for i in x)

    def format(self, x: Str) -> str:
        """Whitespace-separated tokens; the empty string prints as ``<eps>``."""
        return " ".join(self.decode(x)) if x else "<eps>"


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedAutomaton:
    """WFA ``<alpha, beta, {A_a}>`` computing ``alpha^T A_{x_1} ... A_{x_t} beta``.

    ``trans`` is stacked as an array of shape ``(k, n, n)`` whose ``a``-th
    slice is the transition matrix of the ``a``-th alphabet symbol.
    """

    alphabet: Alphabet
    alpha: np.ndarray
    beta: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        alpha = _readonly(self.alpha)
        beta = _readonly(self.beta)
        trans = self.trans
        if isinstance(trans, Mapping):
            missing = set(self.alphabet.symbols) - {str(s) for s in trans}
            extra = {str(s) for s in trans} - set(self.alphabet.symbols)
            if missing or extra:
                raise DomainError(
                    f"transition map must have exactly one matrix per symbol "
                    f"(missing {sorted(missing)}, unknown {sorted(extra)})")
            by_name = {str(s): m for s, m in trans.items()}
            trans = [by_name[s] for s in self.alphabet.symbols]
        trans = _readonly(trans)
        if alpha.ndim != 1 or alpha.size < 1:
            raise DomainError("alpha must be a non-empty vector")
        n = alpha.size
        if beta.shape != (n,):
            raise DomainError(f"beta has shape {beta.shape}, expected ({n},)")
        if trans.shape != (self.alphabet.k, n, n):
            raise DomainError(
                f"transitions have shape {trans.shape}, expected ({self.alphabet.k}, {n}, {n})")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))
                and np.all(np.isfinite(trans))):
            raise DomainError("automaton weights must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "trans", trans)

    @property
    def n(self) -> int:
        return self.alpha.size

    @property
    def k(self) -> int:
        return self.alphabet.k

    @property
    def num_params(self) -> int:
        """``n (k n + 2)``, the dimension of the parameter space."""
        return self.n * (self.k * self.n + 2)

    def matrix(self, symbol) -> np.ndarray:
        return self.trans[self.alphabet.encode([symbol])[0]]

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __repr__(self):
        return (f"WeightedAutomaton(n={self.n}, alphabet={list(self.alphabet.symbols)})")

    @classmethod
    def zero(cls, alphabet: Alphabet, n: int) -> "WeightedAutomaton":
        return cls(alphabet, np.zeros(n), np.zeros(n), np.zeros((alphabet.k, n, n)))

    @classmethod
    def random(cls, rng, alphabet: Alphabet, n: int, scale: float = 1.0):
        """Gaussian weights with standard deviation ``scale`` (test fixture helper)."""
        rng = np.random.default_rng(rng)
        return cls(alphabet, scale * rng.standard_normal(n), scale * rng.standard_normal(n),
                   scale * rng.standard_normal((alphabet.k, n, n)))


def evaluate(A: WeightedAutomaton, x) -> float:
    """Value of the function computed by ``A`` on the string ``x``.

    Uses a left-to-right vector-matrix chain, so the cost is ``O(|x| n^2)``.
    """
    v = A.alpha
    for a in A.alphabet.encode(x):
        v = v @ A.trans[a]
    return float(v @ A.beta)


def evaluate_path_sum(A: WeightedAutomaton, x, max_paths: int = 1_000_000) -> float:
    """Explicit sum over all state paths; a slow oracle for :func:`evaluate`."""
    x = A.alphabet.encode(x)
    n = A.n
    n_paths = n ** (len(x) + 1)
    if n_paths > max_paths:
        raise ResourceError(f"{n_paths} paths exceed the guard of {max_paths}")
    total = 0.0
    for path in np.ndindex(*([n] * (len(x) + 1))):
        w = A.alpha[path[0]]
        for s, a in enumerate(x):
            w *= A.trans[a][path[s], path[s + 1]]
        total += w * A.beta[path[-1]]
    return float(total)


def _check_compatible(A: WeightedAutomaton, B: WeightedAutomaton):
    if A.alphabet != B.alphabet:
        raise DomainError("automata are defined over different alphabets")
    if A.n != B.n:
        raise DomainError(f"state counts differ ({A.n} vs {B.n})")


def add(A: WeightedAutomaton, B: WeightedAutomaton) -> WeightedAutomaton:
    """Parameter-wise sum. This is not the automaton of ``f_A + f_B``."""
    _check_compatible(A, B)
    return WeightedAutomaton(A.alphabet, A.alpha + B.alpha, A.beta + B.beta, A.trans + B.trans)


def scale(c: float, A: WeightedAutomaton) -> WeightedAutomaton:
    """Parameter-wise scaling; multiplies ``f_A(x)`` by ``c ** (|x| + 2)``."""
    c = float(c)
    return WeightedAutomaton(A.alphabet, c * A.alpha, c * A.beta, c * A.trans)


def conjugate(A: WeightedAutomaton, Q) -> WeightedAutomaton:
    """Change of basis ``<Q^T alpha, Q^-1 beta, {Q^-1 A_a Q}>``; same function."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (A.n, A.n):
        raise DomainError(f"Q has shape {Q.shape}, expected ({A.n}, {A.n})")
    cond = np.linalg.cond(Q)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    Qinv = np.linalg.inv(Q)
    return WeightedAutomaton(A.alphabet, Q.T @ A.alpha, Qinv @ A.beta,
                             np.einsum("ij,ajk,kl->ail", Qinv, A.trans, Q))


def make_dfa(alphabet: Alphabet, n_states: int, transitions, initial: int,
             accepting: Iterable[int]) -> WeightedAutomaton:
    """WFA of a (possibly partial) DFA.

    ``transitions`` maps ``(state, symbol) -> state``; missing entries leave an
    all-zero row.
    """
    if n_states < 1:
        raise DomainError("a DFA needs at least one state")

    def check(q):
        if not (isinstance(q, (int, np.integer)) and 0 <= q < n_states):
            raise DomainError(f"state {q!r} out of range for {n_states} states")
        return int(q)

    alpha = np.zeros(n_states)
    alpha[check(initial)] = 1.0
    beta = np.zeros(n_states)
    for q in accepting:
        beta[check(q)] = 1.0
    trans = np.zeros((alphabet.k, n_states, n_states))
    for (q, a), q2 in dict(transitions).items():
        trans[alphabet.encode([a])[0], check(q), check(q2)] = 1.0
    return WeightedAutomaton(alphabet, alpha, beta, trans)


def validate_pfa(A: WeightedAutomaton, tol: float = PFA_TOL) -> None:
    """Raise :class:`DomainError` unless ``A`` has valid PFA parameters."""
    if np.any(A.alpha < -tol) or np.any(A.beta < -tol) or np.any(A.trans < -tol):
        raise DomainError("PFA weights must be nonnegative")
    if abs(A.alpha.sum() - 1.0) > tol:
        raise DomainError(f"initial weights sum to {A.alpha.sum()!r}, expected 1")
    rows = A.beta + A.trans.sum(axis=(0, 2))
    bad = np.flatnonzero(np.abs(rows - 1.0) > tol)
    if bad.size:
        raise DomainError(
            f"stop + outgoing probabilities of state {bad[0]} sum to {rows[bad[0]]!r}, expected 1")


def make_pfa(alphabet: Alphabet, initial, transitions, stopping,
             tol: float = PFA_TOL) -> WeightedAutomaton:
    """WFA of a probabilistic automaton.

    ``transitions[a][i, j]`` is the probability of moving from ``i`` to ``j``
    while emitting ``a``; ``stopping[i]`` is the halting probability at ``i``.
    """
    A = WeightedAutomaton(alphabet, initial, stopping, transitions)
    validate_pfa(A, tol)
    return A


def halting_radius(A: WeightedAutomaton) -> float:
    """Spectral radius of ``sum_a A_a``; a PFA halts almost surely iff it is < 1."""
    return spectral_radius(A.trans.sum(axis=0))


@dataclass(frozen=True, eq=False)
class StringSample:
    """Ordered multiset of strings (symbol-index tuples)."""

    strings: tuple
    alphabet: Alphabet | None = None
    multiplicity: Counter = field(init=False, repr=False)

    def __post_init__(self):
        if self.alphabet is not None:
            strings = tuple(self.alphabet.encode(x) for x in self.strings)
        else:
            strings = tuple(tuple(int(s) for s in x) for x in self.strings)
        if not strings:
            raise DomainError("a sample needs at least one string")
        object.__setattr__(self, "strings", strings)
        object.__setattr__(self, "multiplicity", Counter(strings))

    @property
    def m(self) -> int:
        return len(self.strings)

    @property
    def max_length(self) -> int:
        """``L_S``: length of the longest string."""
        return max(len(x) for x in self.strings)

    @property
    def max_multiplicity(self) -> int:
        """``C_S``: largest number of copies of a single string."""
        return max(self.multiplicity.values())

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self.strings)

    def __getitem__(self, i):
        return self.strings[i]


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Strings paired with real labels."""

    strings: StringSample
    labels: np.ndarray

    def __post_init__(self):
        labels = _readonly(self.labels)
        if labels.shape != (self.strings.m,):
            raise DomainError("need exactly one label per string")
        if not np.all(np.isfinite(labels)):
            raise DomainError("labels must be finite")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pairs(cls, pairs: Sequence, alphabet: Alphabet | None = None):
        xs, zs = zip(*pairs)
        return cls(StringSample(xs, alphabet), np.asarray(zs, dtype=float))


def derive_seed(*parts: int) -> int:
    """Deterministic 32-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def sample_pfa(A: WeightedAutomaton, m: int, seed: int, max_len: int = 100_000) -> StringSample:
    """Draw ``m`` independent strings from a halting PFA by a forward walk.

    String ``i`` uses its own stream seeded by ``(seed, i)``, so results do
    not depend on how the draws are scheduled.
    """
    validate_pfa(A)
    rho = halting_radius(A)
    if rho >= 1.0:
        raise DomainError(f"PFA may not halt: spectral radius of sum_a A_a is {rho:.6g}")
    if m < 1:
        raise DomainError("m must be at least 1")
    n, k = A.n, A.k
    # outcome 0 = stop, outcome 1 + a*n + j = emit a and move to j
    probs = np.concatenate([A.beta[:, None], A.trans.transpose(1, 0, 2).reshape(n, k * n)], axis=1)
    probs = np.clip(probs, 0.0, None)
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1:]
    start = np.cumsum(np.clip(A.alpha, 0.0, None))
    start /= start[-1]
    out = []
    for i in range(m):
        rng = np.random.default_rng([seed, i])
        q = min(int(np.searchsorted(start, rng.random(), side="right")), n - 1)
        x = []
        while True:
            o = min(int(np.searchsorted(cum[q], rng.random(), side="right")), k * n)
            if o == 0:
                break
            a, q = divmod(o - 1, n)
            x.append(a)
            if len(x) > max_len:
                raise ResourceError(f"walk exceeded max_len={max_len}")
        out.append(tuple(x))
    return StringSample(tuple(out), A.alphabet)
