"""Text file formats for automata and samples.

Automata are JSON objects with keys ``alphabet``, ``n``, ``alpha``, ``beta``
and ``trans`` (token -> row-major ``n x n`` nested list). Samples have one
string per line with whitespace-separated tokens; a line holding only
``<eps>`` is the empty string. Floats are written with ``repr`` so that
reading back gives the same bits.
"""

import json
from pathlib import Path

import numpy as np

from .automaton import Alphabet, StringSample, WeightedAutomaton
from .errors import DomainError

EPS = "<eps>"


def automaton_to_dict(A: WeightedAutomaton) -> dict:
    return {
        "alphabet": list(A.alphabet.symbols),
        "n": A.n,
        "alpha": [float(v) for v in A.alpha],
        "beta": [float(v) for v in A.beta],
        "trans": {s: [[float(v) for v in row] for row in A.trans[i]]
                  for i, s in enumerate(A.alphabet.symbols)},
    }


def automaton_from_dict(d: dict) -> WeightedAutomaton:
    try:
        alphabet = Alphabet(tuple(d["alphabet"]))
        n = int(d["n"])
        trans = d["trans"]
        A = WeightedAutomaton(alphabet, np.asarray(d["alpha"], dtype=float),
                              np.asarray(d["beta"], dtype=float),
                              {s: np.asarray(m, dtype=float) for s, m in trans.items()})
    except (KeyError, TypeError, AttributeError) as exc:
        raise DomainError(f"malformed automaton record: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed automaton record: {exc}") from exc
    if A.n != n:
        raise DomainError(f"declared n={n} but alpha has {A.n} entries")
    return A


def dumps_automaton(A: WeightedAutomaton) -> str:
    return json.dumps(automaton_to_dict(A), indent=2) + "\n"


def loads_automaton(text: str) -> WeightedAutomaton:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"automaton file is not valid JSON: {exc}") from exc
    return automaton_from_dict(d)


def save_automaton(A: WeightedAutomaton, path) -> None:
    Path(path).write_text(dumps_automaton(A))


def load_automaton(path) -> WeightedAutomaton:
    return loads_automaton(Path(path).read_text())


def dumps_sample(S: StringSample, alphabet: Alphabet | None = None) -> str:
    alphabet = alphabet or S.alphabet
    if alphabet is None:
        raise DomainError("writing a sample needs an alphabet")
    return "".join(alphabet.format(x) + "\n" for x in S.strings)


def loads_sample(text: str, alphabet: Alphabet | None = None) -> StringSample:
    """Parse a sample file.

    Without an alphabet, one is inferred from the tokens in order of first
    appearance.
    """
    rows = []
    for line in text.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        if tokens == [EPS]:
            rows.append(())
        elif EPS in tokens:
            raise DomainError(f"{EPS} must appear alone on its line: {line!r}")
        else:
            rows.append(tuple(tokens))
    if not rows:
        raise DomainError("sample file contains no strings")
    if alphabet is None:
        seen = {}
        for x in rows:
            for s in x:
                seen.setdefault(s, None)
        alphabet = Alphabet(tuple(seen) or ("a",))
    return StringSample(tuple(rows), alphabet)


def save_sample(S: StringSample, path, alphabet: Alphabet | None = None) -> None:
    Path(path).write_text(dumps_sample(S, alphabet))


def load_sample(path, alphabet: Alphabet | None = None) -> StringSample:
    return loads_sample(Path(path).read_text(), alphabet)
