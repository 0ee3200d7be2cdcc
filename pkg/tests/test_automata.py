"""Core automata constructions against bounded enumeration oracles."""

import random
from itertools import product

import pytest

from lexitrans.budget import AlphabetError
from lexitrans.automata import (Alphabet, CoDetNfa, Dfa, Nfa,
                                SequentialTransducer, accepts, boolean_op,
                                codeterminize, complement,
                                determinize_minimize, equiv,
                                is_backward_deterministic, nfa_of_dfa,
                                product_alphabet, project, seq_run,
                                shortest_word, intersection_witness)
from oracles import all_words

AB = Alphabet(("a", "b"))


def nfa_a_star():
    return Nfa(AB, 1, 0, frozenset({0}), frozenset({(0, "a", 0)}))


def nfa_a_plus():
    return Nfa(AB, 2, 0, frozenset({1}),
               frozenset({(0, "a", 1), (1, "a", 1)}))


def nfa_ab_star():
    return Nfa(AB, 2, 0, frozenset({0}),
               frozenset({(0, "a", 1), (1, "b", 0)}))


def nfa_ba_star():
    return Nfa(AB, 2, 0, frozenset({0}),
               frozenset({(0, "b", 1), (1, "a", 0)}))


def nfa_aa_star():
    return Nfa(AB, 2, 0, frozenset({0}),
               frozenset({(0, "a", 1), (1, "a", 0)}))


def test_accepts_kleene():
    assert accepts(nfa_a_star(), "aaa")
    assert not accepts(nfa_a_star(), "ab")
    assert accepts(nfa_ab_star(), "abab")
    assert accepts(nfa_ab_star(), "")
    assert not accepts(nfa_ab_star(), "aba")


def test_accepts_rejects_foreign_symbol():
    with pytest.raises(AlphabetError):
        accepts(nfa_a_star(), "ax")


def test_determinize_minimize_sizes():
    assert determinize_minimize(nfa_a_star()).num_states == 1
    # union of a* and b*: {eps} + a+ + b+ needs 3 live states
    u = boolean_op(nfa_a_star(),
                   Nfa(AB, 1, 0, frozenset({0}), frozenset({(0, "b", 0)})),
                   "union")
    assert determinize_minimize(u).num_states == 3
    empty = Nfa(AB, 1, 0, frozenset(), frozenset())
    d = determinize_minimize(empty)
    assert d.finals == frozenset()


def test_determinize_minimize_three_live_states_oracle():
    # Myhill-Nerode classes of a* | b* on words of length <= 4:
    # eps, a+, b+ (everything else is dead), checked by brute force.
    u = boolean_op(nfa_a_star(),
                   Nfa(AB, 1, 0, frozenset({0}), frozenset({(0, "b", 0)})),
                   "union")
    member = lambda w: all(c == "a" for c in w) or all(c == "b" for c in w)
    classes = {}
    for w in all_words(AB.symbols, 4):
        sig = tuple(member(w + s) for s in all_words(AB.symbols, 2))
        if any(member(w + s) for s in all_words(AB.symbols, 4)):
            classes.setdefault(sig, w)
    assert len(classes) == determinize_minimize(u).num_states == 3


def test_determinize_preserves_language():
    for a in (nfa_a_star(), nfa_ab_star(), nfa_a_plus(), nfa_aa_star()):
        d = determinize_minimize(a)
        for w in all_words(AB.symbols, 8):
            assert accepts(d, w) == accepts(a, w)


def test_boolean_ops_trivial():
    inter = boolean_op(nfa_a_star(), nfa_aa_star(), "intersect")
    assert equiv(inter, nfa_aa_star()) is True
    eps_only = Nfa(AB, 1, 0, frozenset({0}), frozenset())
    diff = boolean_op(nfa_a_star(), eps_only, "difference")
    assert equiv(diff, nfa_a_plus()) is True


def test_boolean_union_bounded_oracle():
    u = boolean_op(nfa_ab_star(), nfa_ba_star(), "union")
    for w in all_words(AB.symbols, 5):
        assert accepts(u, w) == (accepts(nfa_ab_star(), w)
                                 or accepts(nfa_ba_star(), w))


def test_de_morgan_difference():
    d = boolean_op(nfa_ab_star(), nfa_a_star(), "difference")
    for w in all_words(AB.symbols, 8):
        assert accepts(d, w) == (accepts(nfa_ab_star(), w)
                                 and not accepts(nfa_a_star(), w))


def test_alphabet_mismatch():
    other = Nfa(Alphabet(("a",)), 1, 0, frozenset({0}),
                frozenset({(0, "a", 0)}))
    with pytest.raises(AlphabetError):
        boolean_op(nfa_a_star(), other, "union")


def test_project():
    pair = Alphabet((("a", "0"), ("a", "1"), ("b", "0"), ("b", "1")), arity=2)
    # language {(a,0)(a,1)}
    a = Nfa(pair, 3, 0, frozenset({2}),
            frozenset({(0, ("a", "0"), 1), (1, ("a", "1"), 2)}))
    p = project(a, 0)
    assert accepts(p, "aa")
    assert sorted(p.alphabet.symbols) == ["a", "b"]
    p1 = project(a, 1)
    assert accepts(p1, ("0", "1"))
    empty = Nfa(pair, 1, 0, frozenset(), frozenset())
    assert shortest_word(project(empty, 0)) is None


def test_project_existential_annotation_oracle():
    pair = Alphabet((("a", "0"), ("a", "1"), ("b", "0"), ("b", "1")), arity=2)
    # exactly one (x,1) letter somewhere
    a = Nfa(pair, 2, 0, frozenset({1}), frozenset(
        [(0, (x, "0"), 0) for x in "ab"]
        + [(0, (x, "1"), 1) for x in "ab"]
        + [(1, (x, "0"), 1) for x in "ab"]))
    p = project(a, 0)
    for w in all_words(AB.symbols, 5):
        expect = any(
            accepts(a, tuple(zip(w, ann)))
            for ann in all_words(("0", "1"), len(w))
            if len(ann) == len(w))
        assert accepts(p, w) == expect


def test_codeterminize_structure_and_language():
    for a in (nfa_a_star(), nfa_ab_star(), nfa_a_plus(),
              Nfa(AB, 1, 0, frozenset(), frozenset())):
        co = codeterminize(a)
        assert isinstance(co, CoDetNfa)
        assert is_backward_deterministic(co)
        for w in all_words(AB.symbols, 8):
            assert co.accepts(w) == accepts(a, w)
        # conversion back to a plain Nfa keeps the language
        back = co.to_nfa()
        for w in all_words(AB.symbols, 8):
            assert accepts(back, w) == accepts(a, w)


def test_codeterminize_round_trip_ab_star():
    co = codeterminize(nfa_ab_star())
    again = determinize_minimize(co.to_nfa())
    for w in all_words(AB.symbols, 8):
        assert accepts(again, w) == accepts(nfa_ab_star(), w)


def test_equiv_trivial_and_counterexample():
    assert equiv(nfa_a_star(), nfa_a_star()) is True
    assert equiv(nfa_a_star(), nfa_a_plus()) == ()
    ce = equiv(nfa_ab_star(), nfa_ba_star())
    assert ce != ()
    assert accepts(nfa_ab_star(), ce) != accepts(nfa_ba_star(), ce)


def test_equiv_random_nfas_against_bounded_enumeration():
    rng = random.Random(7)
    for _ in range(12):
        n = 4
        trans = set()
        for _ in range(rng.randrange(3, 9)):
            trans.add((rng.randrange(n), rng.choice("ab"), rng.randrange(n)))
        finals = frozenset(q for q in range(n) if rng.random() < 0.4)
        a = Nfa(AB, n, 0, finals, frozenset(trans))
        d = determinize_minimize(a)
        assert equiv(nfa_of_dfa(d), a) is True
        for w in all_words(AB.symbols, 2 * n):
            assert accepts(d, w) == accepts(a, w)


def test_intersection_witness():
    assert intersection_witness(nfa_a_star(), nfa_a_plus()) == ("a",)
    assert intersection_witness(nfa_ab_star(), nfa_ba_star()) == ()


def test_seq_run():
    d = Dfa(AB, 1, 0, frozenset({0}), {(0, "a"): 0, (0, "b"): 0})
    doubling = SequentialTransducer(d, {(0, "a"): "aa", (0, "b"): "bb"})
    assert seq_run(doubling, "aa") == tuple("aaaa")
    erase = SequentialTransducer(d, {(0, "a"): "a", (0, "b"): ""})
    assert seq_run(erase, "aba") == tuple("aa")
    # non-accepting sink: b leads to a non-final state
    d2 = Dfa(AB, 2, 0, frozenset({0}), {(0, "a"): 0, (0, "b"): 1})
    t2 = SequentialTransducer(d2, {(0, "a"): "a", (0, "b"): "b"})
    assert seq_run(t2, "b") is None
