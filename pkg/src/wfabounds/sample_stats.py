"""Sample statistics ``L_S``, ``C_S`` and the split quantity ``W_S``.

A *split* of a sample picks one decomposition ``x_i = u_i v_i`` per string.
``U_S`` (``V_S``) is the largest number of strings sharing a prefix (suffix);
``W_S`` is the smallest ``max(U_S, V_S)`` over all splits.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .automaton import StringSample
from .errors import DomainError, ResourceError

EXHAUSTIVE = "exhaustive"
HEURISTIC = "heuristic"

#: Default cap on the number of splits enumerated by :func:`ws_exhaustive`.
SPLIT_GUARD = 2_000_000
_BLOCK = 1 << 16


def length_stat(S: StringSample) -> int:
    return S.max_length


def collision_stat(S: StringSample) -> int:
    return S.max_multiplicity


@dataclass(frozen=True)
class SplitAssignment:
    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((tuple(u), tuple(v)) for u, v in self.pairs))
        if not self.pairs:
            raise DomainError("a split needs at least one pair")

    @classmethod
    def from_points(cls, S: StringSample, points) -> "SplitAssignment":
        points = [int(p) for p in points]
        if len(points) != S.m:
            raise DomainError(f"need {S.m} split points, got {len(points)}")
        pairs = []
        for x, p in zip(S.strings, points):
            if not 0 <= p <= len(x):
                raise DomainError(f"split point {p} out of range for a string of length {len(x)}")
            pairs.append((x[:p], x[p:]))
        return cls(tuple(pairs))

    @classmethod
    def trivial(cls, S: StringSample, side: str = "suffix") -> "SplitAssignment":
        """All ``(eps, x)`` (``side="suffix"``) or all ``(x, eps)`` (``side="prefix"``)."""
        if side == "suffix":
            return cls.from_points(S, [0] * S.m)
        return cls.from_points(S, [len(x) for x in S.strings])

    @property
    def prefix_max(self) -> int:
        """``U_S``."""
        return max(Counter(u for u, _ in self.pairs).values())

    @property
    def suffix_max(self) -> int:
        """``V_S``."""
        return max(Counter(v for _, v in self.pairs).values())

    @property
    def width(self) -> int:
        return max(self.prefix_max, self.suffix_max)

    @property
    def points(self) -> tuple:
        return tuple(len(u) for u, _ in self.pairs)

    def is_split_of(self, S: StringSample) -> bool:
        return len(self.pairs) == S.m and all(u + v == x for (u, v), x in zip(self.pairs, S.strings))

    def to_dict(self, alphabet=None) -> dict:
        fmt = alphabet.format if alphabet is not None else (lambda s: list(s))
        return {"U_S": self.prefix_max, "V_S": self.suffix_max,
                "pairs": [[fmt(u), fmt(v)] for u, v in self.pairs]}


@dataclass(frozen=True)
class WsResult:
    value: int
    witness: SplitAssignment
    exactness: str

    def to_dict(self, alphabet=None) -> dict:
        return {"W_S": self.value, "exactness": self.exactness,
                "witness": self.witness.to_dict(alphabet)}


def _piece_ids(S: StringSample):
    """Integer ids of every prefix and suffix, indexed ``[string][split point]``."""
    table = {}
    pre = [[table.setdefault(("p", x[:p]), len(table)) for p in range(len(x) + 1)]
           for x in S.strings]
    suf = [[table.setdefault(("s", x[p:]), len(table)) for p in range(len(x) + 1)]
           for x in S.strings]
    return pre, suf


def _row_max_multiplicity(ids):
    s = np.sort(ids, axis=1)
    best = np.ones(s.shape[0], dtype=np.int64)
    run = np.ones(s.shape[0], dtype=np.int64)
    for j in range(1, s.shape[1]):
        run = np.where(s[:, j] == s[:, j - 1], run + 1, 1)
        np.maximum(best, run, out=best)
    return best


def ws_exhaustive(S: StringSample, guard: int = SPLIT_GUARD) -> WsResult:
    """Exact ``W_S`` by enumerating every split.

    Splits are visited as a mixed-radix counter over split points with the
    first string as the least significant digit; the first split reaching the
    minimum is the witness.
    """
    radices = [len(x) + 1 for x in S.strings]
    total = math.prod(radices)
    if total > guard:
        raise ResourceError(
            f"{total} splits exceed the guard of {guard}; use ws_heuristic instead")
    pre, suf = _piece_ids(S)
    pre = [np.asarray(r) for r in pre]
    suf = [np.asarray(r) for r in suf]
    strides = np.cumprod([1] + radices[:-1])
    best_val, best_idx = None, None
    for start in range(0, total, _BLOCK):
        idx = np.arange(start, min(total, start + _BLOCK), dtype=np.int64)
        digits = [(idx // strides[i]) % radices[i] for i in range(S.m)]
        P = np.stack([pre[i][d] for i, d in enumerate(digits)], axis=1)
        V = np.stack([suf[i][d] for i, d in enumerate(digits)], axis=1)
        width = np.maximum(_row_max_multiplicity(P), _row_max_multiplicity(V))
        j = int(np.argmin(width))
        if best_val is None or width[j] < best_val:
            best_val, best_idx = int(width[j]), int(idx[j])
            if best_val == 1:
                break
    points = [(best_idx // int(strides[i])) % radices[i] for i in range(S.m)]
    witness = SplitAssignment.from_points(S, points)
    return WsResult(witness.width, witness, EXHAUSTIVE)


class _Counts:
    """Multiplicities of prefix/suffix ids plus a histogram of those multiplicities."""

    def __init__(self):
        self.count = Counter()
        self.hist = Counter()

    def add(self, key, delta):
        c = self.count[key]
        if c:
            self.hist[c] -= 1
            if not self.hist[c]:
                del self.hist[c]
        c += delta
        self.count[key] = c
        if c:
            self.hist[c] += 1

    def objective(self):
        top = max(self.hist)
        return top, self.hist[top]


def _local_search(pre, suf, lengths, rng):
    m = len(lengths)
    points = [int(rng.integers(0, n + 1)) for n in lengths]
    counts = _Counts()
    for i, p in enumerate(points):
        counts.add(pre[i][p], 1)
        counts.add(suf[i][p], 1)
    order = rng.permutation(m)
    improved = True
    while improved:
        improved = False
        for i in order:
            if lengths[i] == 0:
                continue
            cur = points[i]
            current = counts.objective()
            counts.add(pre[i][cur], -1)
            counts.add(suf[i][cur], -1)
            best_p, best_obj = cur, current
            for p in range(lengths[i] + 1):
                if p == cur:
                    continue
                counts.add(pre[i][p], 1)
                counts.add(suf[i][p], 1)
                obj = counts.objective()
                counts.add(pre[i][p], -1)
                counts.add(suf[i][p], -1)
                if obj < best_obj:
                    best_p, best_obj = p, obj
            counts.add(pre[i][best_p], 1)
            counts.add(suf[i][best_p], 1)
            if best_p != cur:
                points[i] = best_p
                improved = True
    return points, counts.objective()[0]


def ws_heuristic(S: StringSample, seed: int = 0, restarts: int = 16) -> WsResult:
    """Upper bound on ``W_S`` by randomized local search.

    Each restart starts from uniformly random split points and visits the
    strings in a random order, moving a string to its best split point while
    that lowers ``(max(U_S, V_S), number of prefixes/suffixes at that max)``.
    Restart ``j`` uses the stream seeded by ``(seed, j)``.
    """
    if restarts < 1:
        raise DomainError("restarts must be at least 1")
    pre, suf = _piece_ids(S)
    lengths = [len(x) for x in S.strings]
    best_points, best_val = None, None
    for j in range(restarts):
        rng = np.random.default_rng([seed, j])
        points, val = _local_search(pre, suf, lengths, rng)
        if best_val is None or val < best_val:
            best_points, best_val = points, val
            if val == 1:
                break
    witness = SplitAssignment.from_points(S, best_points)
    return WsResult(witness.width, witness, HEURISTIC)


def ws_stat(S: StringSample, seed: int = 0, restarts: int = 16,
            guard: int = SPLIT_GUARD) -> WsResult:
    """Exact ``W_S`` when the split count is within ``guard``, else the heuristic."""
    try:
        return ws_exhaustive(S, guard)
    except ResourceError:
        return ws_heuristic(S, seed, restarts)
