"""Simple transducers vs the sum form, both ways."""

import pytest

from lexitrans.budget import OverlapError
from lexitrans.automata import Alphabet, Nfa, accepts
from lexitrans.simple import (SimpleSum, simple_op_run, simple_run, sum_eval,
                              sum_to_transducer, transducer_to_sum)
from oracles import all_words

AB = Alphabet(("a", "b"))


def a_star():
    return Nfa(AB, 1, 0, frozenset({0}), frozenset({(0, "a", 0)}))


def b_plus():
    return Nfa(AB, 2, 0, frozenset({1}),
               frozenset({(0, "b", 1), (1, "b", 1)}))


def a_plus():
    return Nfa(AB, 2, 0, frozenset({1}),
               frozenset({(0, "a", 1), (1, "a", 1)}))


def test_sum_to_transducer_basic():
    t = sum_to_transducer(SimpleSum(AB, (((a_star()), "x"),)))
    assert simple_run(t, "aa") == ("x",)
    assert simple_run(t, "ab") is None


def test_sum_two_parts():
    s = SimpleSum(AB, ((a_star(), "x"), (b_plus(), "")))
    t = sum_to_transducer(s)
    assert simple_run(t, "bb") == ()
    assert simple_run(t, "") == ("x",)
    assert simple_run(t, "ba") is None


def test_overlap_detected_with_witness():
    s = SimpleSum(AB, ((a_star(), "x"), (a_plus(), "y")))
    with pytest.raises(OverlapError) as e:
        sum_to_transducer(s)
    assert e.value.witness == ("a",)
    assert accepts(a_star(), e.value.witness)
    assert accepts(a_plus(), e.value.witness)


def test_sum_semantics_agree_with_transducer():
    s = SimpleSum(AB, ((a_star(), "x"), (b_plus(), "")))
    t = sum_to_transducer(s)
    for w in all_words(AB.symbols, 5):
        assert sum_eval(s, w) == simple_run(t, w)


def test_outputs_length_at_most_one():
    s = SimpleSum(AB, ((a_star(), "x"), (b_plus(), "")))
    t = sum_to_transducer(s)
    for w in all_words(AB.symbols, 5):
        out = simple_run(t, w)
        assert out is None or len(out) <= 1


def test_op_run_returns_final_state():
    t = sum_to_transducer(SimpleSum(AB, ((a_star(), ""),)))
    res = simple_op_run(t, t.dfa.initial, "aa")
    assert res is not None
    out, qf = res
    assert out == () and qf in t.dfa.finals


def test_round_trip_transducer_sum():
    s = SimpleSum(AB, ((a_star(), "x"), (b_plus(), "y")))
    t = sum_to_transducer(s)
    s2 = transducer_to_sum(t)
    assert len(s2.parts) == 2
    s2.check_disjoint()
    t2 = sum_to_transducer(s2)
    for w in all_words(AB.symbols, 5):
        assert simple_run(t, w) == simple_run(t2, w) == sum_eval(s, w)


def test_empty_domain_transducer_round_trip():
    t = sum_to_transducer(SimpleSum(AB, ()))
    assert simple_run(t, "") is None
    assert transducer_to_sum(t).parts == ()
