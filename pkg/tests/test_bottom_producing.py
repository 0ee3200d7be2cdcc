"""Bottom-producing normalization against the original machine as oracle."""

from itertools import product

from lexitrans.catalog import make_id, make_sub, SIGMA_AB
from lexitrans.convert import bottom_producing, lex_to_nmt
from lexitrans.nmt import LIFT, Nmt, is_bottom_producing, \
    is_structurally_spf, nmt_run


def words_upto(n):
    for k in range(n + 1):
        yield from product("ab", repeat=k)


def with_output_on_lifts(t, letter="x"):
    """The machine with an extra letter emitted on every top-level lift."""
    mu = {k: ((letter,) if t.delta[k][0] == LIFT else v)
          for k, v in t.mu.items()}
    out = t.output_alphabet
    if letter not in set(out.symbols):
        from lexitrans.automata import Alphabet
        out = Alphabet(out.symbols + (letter,))
    return Nmt(t.input_alphabet, out, t.colors, t.c0, t.num_states, t.q0,
               t.finals, t.delta, mu, t.delta_call, t.delta_ret, t.inner)


def test_already_bottom_producing_unchanged():
    t = lex_to_nmt(make_id(SIGMA_AB))
    assert is_bottom_producing(t)
    assert bottom_producing(t) is t


def test_level1_lift_emitter():
    t = with_output_on_lifts(lex_to_nmt(make_id(SIGMA_AB)))
    assert not is_bottom_producing(t)
    bp = bottom_producing(t)
    assert is_bottom_producing(bp)
    assert is_structurally_spf(bp)
    for w in words_upto(5):
        assert nmt_run(bp, w) == nmt_run(t, w), w


def test_level1_multiletter_outputs():
    t = lex_to_nmt(make_id(SIGMA_AB))
    mu = dict(t.mu)
    for k in t.mu:
        if t.delta[k][0] == LIFT:
            mu[k] = ("x", "y", "x")
    from lexitrans.automata import Alphabet
    t2 = Nmt(t.input_alphabet, Alphabet(("a", "b", "x", "y")), t.colors,
             t.c0, t.num_states, t.q0, t.finals, t.delta, mu, t.delta_call,
             t.delta_ret, t.inner)
    bp = bottom_producing(t2)
    assert is_bottom_producing(bp)
    for w in words_upto(4):
        assert nmt_run(bp, w) == nmt_run(t2, w), w


def test_level2_lift_emitter():
    t = with_output_on_lifts(lex_to_nmt(make_sub(SIGMA_AB)))
    bp = bottom_producing(t)
    assert is_bottom_producing(bp)
    for w in words_upto(3):
        assert nmt_run(bp, w) == nmt_run(t, w), w
