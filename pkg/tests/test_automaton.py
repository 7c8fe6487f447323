import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wfabounds import (Alphabet, ConditioningError, DomainError, LabeledSample, ResourceError,
                       StringSample, WeightedAutomaton, add, conjugate, evaluate,
                       evaluate_path_sum, make_dfa, make_pfa, sample_pfa, scale, validate_pfa)
from wfabounds.automaton import halting_radius
from wfabounds.experiments import geometric_pfa
from wfabounds.norms import enumerate_levels


def strings_upto(k, L):
    for t in range(L + 1):
        yield from itertools.product(range(k), repeat=t)


small_automata = st.builds(
    lambda seed, k, n: WeightedAutomaton.random(seed, Alphabet.of_size(k), n),
    st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3))


def test_toy_value_on_ab(toy):
    assert evaluate(toy, "ab") == 52.0
    assert toy(("a", "b")) == 52.0
    assert toy([0, 1]) == 52.0


def test_toy_empty_string_is_alpha_dot_beta(toy):
    assert evaluate(toy, "") == 1 * 2 + 3 * 1 + 4 * 1


def test_toy_matches_path_sums_up_to_length_4(toy):
    for x in strings_upto(2, 4):
        assert evaluate(toy, x) == pytest.approx(evaluate_path_sum(toy, x), abs=1e-12, rel=0)


@settings(max_examples=40, deadline=None)
@given(small_automata, st.lists(st.integers(0, 2), max_size=5))
def test_chain_product_equals_path_sum(A, word):
    x = [a % A.k for a in word]
    v, ref = evaluate(A, x), evaluate_path_sum(A, x)
    assert v == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_path_sum_guard(toy):
    with pytest.raises(ResourceError):
        evaluate_path_sum(toy, "ab" * 10, max_paths=1000)


def test_alphabet_round_trip_and_errors():
    S = Alphabet(("x", "yy", "z"))
    assert S.encode(["yy", "z"]) == (1, 2)
    assert S.decode((1, 2)) == ("yy", "z")
    assert S.format(()) == "<eps>"
    assert S.format((0, 1)) == "x yy"
    with pytest.raises(DomainError):
        S.encode(["q"])
    with pytest.raises(DomainError):
        S.encode([3])
    with pytest.raises(DomainError):
        Alphabet(("a", "a"))
    with pytest.raises(DomainError):
        Alphabet(())
    with pytest.raises(DomainError):
        Alphabet(("a b",))
    assert Alphabet.of_size(3).symbols == ("a", "b", "c")
    assert Alphabet.of_size(30).k == 30


def test_automaton_shape_validation():
    ab = Alphabet.of_size(2)
    with pytest.raises(DomainError):
        WeightedAutomaton(ab, [1, 0], [1], np.zeros((2, 2, 2)))
    with pytest.raises(DomainError):
        WeightedAutomaton(ab, [1], [1], np.zeros((1, 1, 1)))
    with pytest.raises(DomainError):
        WeightedAutomaton(ab, [np.inf], [1], np.zeros((2, 1, 1)))
    with pytest.raises(DomainError):
        WeightedAutomaton(ab, [1], [1], {"a": [[0]]})


def test_automaton_is_read_only(toy):
    with pytest.raises(ValueError):
        toy.alpha[0] = 5.0
    assert toy.num_params == 3 * (2 * 3 + 2)


def test_zero_automaton_computes_zero():
    Z = WeightedAutomaton.zero(Alphabet.of_size(2), 3)
    assert all(evaluate(Z, x) == 0.0 for x in strings_upto(2, 3))


@settings(max_examples=30, deadline=None)
@given(small_automata, st.floats(-2, 2, allow_nan=False), st.lists(st.integers(0, 2), max_size=4))
def test_scale_multiplies_by_power_of_length(A, c, word):
    x = [a % A.k for a in word]
    assert evaluate(scale(c, A), x) == pytest.approx(c ** (len(x) + 2) * evaluate(A, x),
                                                     rel=1e-9, abs=1e-9)


def test_add_is_parameterwise(toy):
    B = add(toy, toy)
    assert np.array_equal(B.trans, 2 * toy.trans)
    # not the sum of the functions: doubles every factor
    assert evaluate(B, "ab") == 2 ** 4 * 52
    with pytest.raises(DomainError):
        add(toy, WeightedAutomaton.zero(Alphabet.of_size(2), 2))


@settings(max_examples=30, deadline=None)
@given(small_automata, st.integers(0, 1000))
def test_conjugation_preserves_the_function(A, seed):
    rng = np.random.default_rng(seed)
    Q = rng.standard_normal((A.n, A.n)) + 3 * np.eye(A.n)
    B = conjugate(A, Q)
    for x in strings_upto(A.k, 3):
        assert evaluate(B, x) == pytest.approx(evaluate(A, x), rel=1e-8, abs=1e-8)


def test_conjugation_rejects_ill_conditioned(toy):
    with pytest.raises(ConditioningError):
        conjugate(toy, np.diag([1.0, 1.0, 1e-14]))
    with pytest.raises(DomainError):
        conjugate(toy, np.eye(2))


def test_dfa_recognises_strings_ending_in_a():
    ab = Alphabet(("a", "b"))
    D = make_dfa(ab, 2, {(0, "a"): 1, (0, "b"): 0, (1, "a"): 1, (1, "b"): 0}, 0, [1])
    for x in strings_upto(2, 5):
        assert evaluate(D, x) == float(len(x) > 0 and x[-1] == 0)
    with pytest.raises(DomainError):
        make_dfa(ab, 2, {(0, "a"): 2}, 0, [1])


def test_pfa_validation():
    ab = Alphabet.of_size(1)
    A = make_pfa(ab, [1.0], [[[0.5]]], [0.5])
    validate_pfa(A)
    with pytest.raises(DomainError):
        make_pfa(ab, [1.0], [[[0.6]]], [0.5])
    with pytest.raises(DomainError):
        make_pfa(ab, [0.9], [[[0.5]]], [0.5])
    with pytest.raises(DomainError):
        make_pfa(ab, [1.0], [[[1.5]]], [-0.5])


def test_geometric_pfa_probabilities_sum_to_one():
    A = geometric_pfa(2, 0.5)
    total = sum(float(np.sum(F @ A.beta)) for _, F in enumerate_levels(A, 18))
    assert total == pytest.approx(1.0 - 0.5 ** 19, abs=1e-12)
    assert halting_radius(A) == pytest.approx(0.5)


def test_sample_pfa_is_deterministic_and_prefix_stable():
    A = geometric_pfa(2, 0.3)
    S1 = sample_pfa(A, 20, seed=7)
    S2 = sample_pfa(A, 20, seed=7)
    assert S1.strings == S2.strings
    assert sample_pfa(A, 5, seed=7).strings == S1.strings[:5]
    assert sample_pfa(A, 20, seed=8).strings != S1.strings


def test_sample_pfa_frequencies_match_probabilities():
    A = geometric_pfa(2, 0.5)
    S = sample_pfa(A, 4000, seed=1)
    freq_eps = S.multiplicity[()] / S.m
    # binomial standard deviation is about 0.008
    assert abs(freq_eps - 0.5) < 0.04
    freq_a = S.multiplicity[(0,)] / S.m
    assert abs(freq_a - 0.125) < 0.03


def test_sample_pfa_rejects_non_halting():
    ab = Alphabet.of_size(1)
    A = WeightedAutomaton(ab, [1.0], [0.0], [[[1.0]]])
    with pytest.raises(DomainError):
        sample_pfa(A, 3, 0)


def test_sample_pfa_length_guard():
    A = geometric_pfa(1, 1e-6)
    with pytest.raises(ResourceError):
        sample_pfa(A, 1, seed=0, max_len=10)


def test_string_sample_statistics():
    S = StringSample(["ab", "ab", "", "b"], Alphabet(("a", "b")))
    assert S.m == 4 and len(S) == 4
    assert S.max_length == 2
    assert S.max_multiplicity == 2
    assert S[0] == (0, 1)
    with pytest.raises(DomainError):
        StringSample([])


def test_labeled_sample():
    L = LabeledSample.from_pairs([("a", 1.0), ("", -1.0)], Alphabet(("a",)))
    assert L.strings.m == 2
    assert list(L.labels) == [1.0, -1.0]
    with pytest.raises(DomainError):
        LabeledSample(StringSample([(0,)]), np.array([1.0, 2.0]))

