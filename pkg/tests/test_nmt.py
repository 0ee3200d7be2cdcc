"""Step semantics, runs, traces, and the full-configuration analysis."""

import pytest

from lexitrans.budget import Budget, MachineError
from lexitrans.automata import Alphabet
from lexitrans.catalog import catalog, make_id, make_rev, make_square, SIGMA
from lexitrans.convert import lex_to_nmt
from lexitrans.lexexpr import lex_eval
from lexitrans.nmt import (LIFT, Configuration, Nmt, call_input,
                           is_bottom_producing, is_structurally_spf,
                           last_states, nmt_run, nmt_run_op, nmt_step,
                           nmt_trace, phi_encode, reachable_full_configs,
                           rr_traversals, run_op, spf_maps)
from lexitrans.simple import SimpleSum, simple_op_run, simple_run, \
    sum_to_transducer
from lexitrans.automata import Nfa
from oracles import all_words

AB = Alphabet(("a", "b"))


def eps_leaf(sigma):
    """Assistant accepting everything with empty output."""
    univ = Nfa(sigma, 1, 0, frozenset({0}),
               frozenset((0, s, 0) for s in sigma.symbols))
    return sum_to_transducer(SimpleSum(sigma, ((univ, ()),)))


def tiny_machine(loop=False):
    """One-color level-1 machine: mark everything, call once, accept.

    With loop=True the machine drops and lifts forever on the same cell."""
    sigma = AB
    colors = ("c",)
    conv_syms = tuple((s, "c") for s in ("a", "b", "<|", "|>"))
    inner = eps_leaf(Alphabet(conv_syms, arity=2))
    delta, mu = {}, {}
    for sym in ("a", "b", "|>"):
        if loop and sym != "|>":
            delta[(0, sym, "c")] = ("c", 1)
            delta[(1, sym, "c")] = (LIFT, 0)
        else:
            delta[(0, sym, "c")] = ("c", 0)
    for k in delta:
        mu[k] = ("x",) if k[1] == "|>" else ()
    call, ret = spf_maps(3, colors, inner.dfa.initial, inner.dfa.finals)
    return Nmt(sigma, Alphabet(("x",)), colors, "c", 3, 0,
               frozenset({2}), delta, mu, call, ret, inner)


def test_initial_drop_step():
    t = tiny_machine()
    u = ("a",)
    cfg = Configuration(0, 2, ("c",))
    nxt, label = nmt_step(t, u, cfg)
    assert nxt == Configuration(0, 1, ("c", "c"))
    assert label.kind == "drop" and label.output == ("x",)


def test_lift_at_right_marker_is_illegal():
    sigma = AB
    colors = ("c",)
    conv_syms = tuple((s, "c") for s in ("a", "b", "<|", "|>"))
    inner = eps_leaf(Alphabet(conv_syms, arity=2))
    delta = {(0, "|>", "c"): (LIFT, 0)}
    mu = {k: () for k in delta}
    call, ret = spf_maps(1, colors, inner.dfa.initial, inner.dfa.finals)
    t = Nmt(sigma, Alphabet(("x",)), colors, "c", 1, 0, frozenset(),
            delta, mu, call, ret, inner)
    assert nmt_step(t, ("a",), Configuration(0, 2, ("c",))) is None


def test_call_step_output_matches_inner_run():
    e = make_id()
    t = lex_to_nmt(e)
    u = ("a", "b")
    cfg = Configuration(t.q0, 3, (t.c0,))
    while cfg.pos != 0:
        cfg, _ = nmt_step(t, u, cfg)
    nxt, label = nmt_step(t, u, cfg)
    assert label.kind == "call"
    conv = call_input(t, u, cfg.ann)
    expect = simple_op_run(t.inner, t.delta_call[(cfg.state, cfg.ann[0])],
                           conv)
    assert expect is not None
    assert label.output == expect[0] and label.inner_final == expect[1]
    assert nxt.pos == 1 and nxt.ann == cfg.ann[1:]


def test_annotation_length_law():
    t = lex_to_nmt(make_id())
    u = ("a", "b")
    cfg = Configuration(t.q0, 3, (t.c0,))
    n = len(u)
    for _ in range(60):
        assert len(cfg.ann) == n + 2 - cfg.pos
        step = nmt_step(t, u, cfg)
        if step is None or cfg.state in t.finals:
            break
        before = len(cfg.ann)
        cfg, label = step
        if label.kind == "drop":
            assert len(cfg.ann) == before + 1
        elif label.kind == "lift":
            assert len(cfg.ann) == before - 1
        else:
            assert len(cfg.ann) == before - 1  # the marker marble pops


def test_cycle_detection():
    t = tiny_machine(loop=True)
    assert nmt_run(t, ("a",)) is None


def test_level0_delegates_to_simple():
    leaf = catalog()["id"].value.inner
    t = lex_to_nmt(leaf)
    assert t is leaf.simple
    conv = tuple(zip("ab", "10"))
    assert nmt_run_op(t, t.dfa.initial, conv) == \
        simple_op_run(t, t.dfa.initial, conv)


def test_walker_id_run_op():
    t = lex_to_nmt(make_id())
    res = run_op(t, t.q0, ("a", "b"))
    assert res is not None
    out, qf = res
    assert out == ("a", "b") and qf in t.finals


def test_walker_matches_lex_eval_small():
    for name, entry in catalog().items():
        if entry.kind != "lex":
            continue
        t = lex_to_nmt(entry.value)
        assert is_structurally_spf(t)
        assert is_bottom_producing(t)
        for w in all_words(("a", "b"), 4):
            assert nmt_run(t, w) == lex_eval(entry.value, w), (name, w)


def test_walker_rev_and_square_samples():
    assert nmt_run(lex_to_nmt(make_rev()), "ab") == ("b", "a")
    assert nmt_run(lex_to_nmt(make_square()), "ab") == \
        ("a'", "b", "a", "b'")


def test_trace_counts_and_output():
    e = make_id()
    t = lex_to_nmt(e)
    u = ("a",)
    lines = nmt_trace(t, u, depth=0)
    calls = [l for l in lines if l.label.kind == "call"]
    assert len(calls) == 2  # one per annotation of length 1
    total = tuple(x for l in lines for x in l.label.output)
    assert total == nmt_run(t, u)


def test_trace_depth_expands_inner():
    t = lex_to_nmt(make_square())
    lines0 = nmt_trace(t, ("a",), depth=0)
    lines1 = nmt_trace(t, ("a",), depth=1)
    assert all(l.depth == 0 for l in lines0)
    assert any(l.depth == 1 for l in lines1)
    with pytest.raises(MachineError):
        nmt_trace(t, ("a",), depth=5)


def test_reachable_full_configs_id():
    t = lex_to_nmt(make_id())
    full = reachable_full_configs(t, ("a",))
    assert len(full) == 2
    values = [cfg.ann[1][1] for cfg in full]  # value component at position 1
    assert values == ["0", "1"]
    assert [cfg.pos for cfg in full] == [0, 0]
    # on eps the single annotation gives one call; the accepting state then
    # necessarily lands on the left marker as a terminal full configuration
    eps_full = reachable_full_configs(t, ())
    assert len([c for c in eps_full if c.state not in t.finals]) == 1


def test_last_states_basics():
    t = lex_to_nmt(make_id())
    u = ("a", "b")
    full = reachable_full_configs(t, u)
    for nu in full:
        last = last_states(t, u, nu)
        assert set(last.keys()) == {0, 1, 2, 3}
        assert last[0] == nu.state
    # first full configuration comes from the single right-to-left pass
    first = full[0]
    last = last_states(t, u, first)
    assert last[0] == first.state


def test_last_states_unreachable_raises():
    t = lex_to_nmt(make_id())
    bogus = Configuration(t.q0, 0, (t.c0,) * 4)
    with pytest.raises(MachineError):
        last_states(t, ("a", "b"), bogus)


def test_rr_reflexive_and_alpha_independent():
    t = lex_to_nmt(make_id())
    u = ("a", "b")
    for i in range(0, 4):
        for c in t.colors:
            rr = rr_traversals(t, u, i, c)
            for q in range(t.num_states):
                assert (q, q) in rr
            alt = tuple(t.colors[0] for _ in range(3 - i))
            assert rr == rr_traversals(t, u, i, c, alpha=alt)


def test_phi_encode_shape_and_projection():
    t = lex_to_nmt(make_id())
    for u in [(), ("a",), ("a", "b")]:
        full = reachable_full_configs(t, u)
        cache = {}
        encs = [phi_encode(t, u, nu, rr_cache=cache) for nu in full]
        for nu, enc in zip(full, encs):
            assert len(enc) == len(u) + 2
            assert tuple(x[0] for x in enc) == nu.ann
        # injective over the reachable full configurations
        assert len(set(encs)) == len(encs)
