"""The expression evaluator against the definition-chasing oracle, domain
computation, and domain restriction."""

import pytest

from lexitrans.budget import Budget, BudgetExceeded
from lexitrans.automata import Alphabet, Nfa, accepts, equiv, nfa_of_dfa, \
    determinize_minimize
from lexitrans.catalog import catalog, make_id, make_pref, SIGMA
from lexitrans.lexexpr import (Leaf, MapLex, lex_domain, lex_eval, lex_level,
                               lex_restrict, flatten)
from lexitrans.simple import simple_run
from oracles import all_words, eval_expr_bruteforce

AB = Alphabet(("a", "b"))


def lex_entries():
    return [(n, e.value) for n, e in catalog().items() if e.kind == "lex"]


def test_id_and_rev_on_abc():
    c = catalog()
    assert lex_eval(c["id"].value, "abc") == tuple("abc")
    assert lex_eval(c["rev"].value, "abc") == tuple("cba")


def test_levels():
    c = catalog()
    assert lex_level(c["id"].value) == 1
    assert lex_level(c["sub"].value) == 2
    assert lex_level(c["square"].value) == 2
    leaf = c["id"].value.inner
    assert lex_level(leaf) == 0


def test_eval_matches_bruteforce_oracle():
    for name, e in lex_entries():
        for w in all_words(("a", "b"), 3):
            assert lex_eval(e, w) == eval_expr_bruteforce(e, w), name


def test_output_length_law():
    # |f(u)| equals the sum of the block outputs, blockwise
    e = make_id()
    for w in all_words(("a", "b"), 4):
        total = lex_eval(e, w)
        pieces = [simple_run(e.inner.simple, tuple(zip(w, ann)))
                  for ann in all_words(("0", "1"), len(w))
                  if len(ann) == len(w)]
        assert total is not None
        assert len(total) == sum(len(p) for p in pieces)
        assert len(total) <= 2 ** len(w)


def test_budget_guard():
    e = make_id()
    with pytest.raises(BudgetExceeded):
        lex_eval(e, "abcd", budget=Budget(3))


def test_domain_total_leaf():
    c = catalog()
    dom = lex_domain(c["id"].value)
    for w in all_words(SIGMA.symbols, 3):
        assert accepts(dom, w)


def test_domain_restricted_leaf_collapses():
    # leaf defined only on all-0 annotations => domain {eps}
    from lexitrans.orders import OrderedAlphabet
    from lexitrans.simple import SimpleSum, sum_to_transducer
    from lexitrans.automata import product_alphabet
    b = OrderedAlphabet(("0", "1"))
    pair = product_alphabet(AB, Alphabet(b.symbols))
    zeros = Nfa(pair, 1, 0, frozenset({0}),
                frozenset((0, (s, "0"), 0) for s in AB.symbols))
    leaf = Leaf(sum_to_transducer(SimpleSum(pair, ((zeros, ""),))), AB)
    e = MapLex(b, leaf)
    dom = lex_domain(e)
    for w in all_words(AB.symbols, 4):
        assert accepts(dom, w) == (len(w) == 0)
        assert accepts(dom, w) == (lex_eval(e, w) is not None)


def test_domain_agrees_with_evaluator():
    for name, e in lex_entries():
        dom = lex_domain(e)
        for w in all_words(("a", "b"), 4):
            assert accepts(dom, w) == (lex_eval(e, w) is not None), name


def test_restrict_id_to_a_star():
    a_star = Nfa(SIGMA, 1, 0, frozenset({0}), frozenset({(0, "a", 0)}))
    r = lex_restrict(make_id(), a_star)
    assert lex_eval(r, "aa") == tuple("aa")
    assert lex_eval(r, "ab") is None
    assert lex_level(r) == 1


def test_restrict_to_universe_is_identity():
    univ = Nfa(SIGMA, 1, 0, frozenset({0}),
               frozenset((0, s, 0) for s in SIGMA.symbols))
    e = make_id()
    r = lex_restrict(e, univ)
    for w in all_words(("a", "b"), 4):
        assert lex_eval(r, w) == lex_eval(e, w)


def test_restrict_pref_guard_oracle():
    ab_star = Nfa(SIGMA, 2, 0, frozenset({0}),
                  frozenset({(0, "a", 1), (1, "b", 0)}))
    e = make_pref()
    r = lex_restrict(e, ab_star)
    for w in all_words(("a", "b"), 4):
        expect = lex_eval(e, w) if accepts(ab_star, w) else None
        assert lex_eval(r, w) == expect
    assert lex_level(r) == lex_level(e)


def test_flatten_tracks_outermost_first():
    c = catalog()
    t, orders, sigma = flatten(c["square"].value)
    assert len(orders) == 2
    assert sigma.symbols == SIGMA.symbols
    # flat letters are (sigma, b1, b2) with the outer layer's track first
    content = t.content_alphabet
    assert all(len(s) == 3 for s in content.symbols)
    dom = lex_domain(c["square"].value)
    assert equiv(dom, nfa_of_dfa(determinize_minimize(
        Nfa(SIGMA, 1, 0, frozenset({0}),
            frozenset((0, s, 0) for s in SIGMA.symbols))))) is True
