"""Closure constructions: post-composition with sequential transducers and
the map/rev/square generators, disjoint sum, and pre-composition with
morphisms, letter-to-letter transducers and rational transductions."""

from dataclasses import dataclass, field
from collections import deque

from .budget import (AlphabetError, LexitransError, MachineError,
                     OverlapError, DEFAULT_STATE_CAP)
from .orders import (LEFT_MARKER, RIGHT_MARKER, SEPARATOR, OrderedAlphabet,
                     lex_cmp, word)
from .automata import (Alphabet, Dfa, Nfa, SequentialTransducer, accepts,
                       boolean_op, complement, determinize_minimize,
                       intersection_witness, inverse_lift, nfa_of_dfa,
                       product_alphabet, shortest_word, symkey, seq_step_run)
from .simple import (SimpleSum, SimpleTransducer, marked_alphabet,
                     sum_to_transducer, transducer_to_sum)
from .lexexpr import (Leaf, MapLex, leaf_of, lex_domain, lex_eval, lex_level,
                      lex_restrict, simple_domain_nfa)


# ---------------------------------------------------------------------------
# Expression plumbing: letter renaming, unit padding.
# ---------------------------------------------------------------------------


def map_leaf_letters(t, new_content, fwd):
    """Simple transducer re-keyed to new content letters via fwd (total)."""
    full = marked_alphabet(new_content)
    delta = {}
    for p in range(t.dfa.num_states):
        for mk in (LEFT_MARKER, RIGHT_MARKER):
            q = t.dfa.delta.get((p, mk))
            if q is not None:
                delta[(p, mk)] = q
        for sym in new_content.symbols:
            q = t.dfa.delta.get((p, fwd(sym)))
            if q is not None:
                delta[(p, sym)] = q
    return SimpleTransducer(
        Dfa(full, t.dfa.num_states, t.dfa.initial, t.dfa.finals, delta),
        t.mu)


def precompose_letter_map(e, new_input, fwd):
    """The expression reading new_input letters, each translated by fwd."""
    if isinstance(e, Leaf):
        return Leaf(map_leaf_letters(e.simple, new_input, fwd),
                    e.output_alphabet)
    pair = product_alphabet(new_input, Alphabet(e.order.symbols))
    inner = precompose_letter_map(e.inner, pair,
                                  lambda s: (fwd(s[0]), s[1]))
    return MapLex(e.order, inner)


UNIT = OrderedAlphabet(("u",))


def pad_with_unit_layer(e):
    """Wrap one maplex layer over a singleton alphabet: the level rises by
    one and the behavior is unchanged (a single all-minimal block)."""
    sigma = e.input_alphabet
    pair = product_alphabet(sigma, Alphabet(UNIT.symbols))
    lifted = precompose_letter_map(e, pair, lambda s: s[0])
    return MapLex(UNIT, lifted)


def pad_to_level(e, level):
    while lex_level(e) < level:
        e = pad_with_unit_layer(e)
    return e


def constant_expr(input_alphabet, value, output_alphabet):
    from .convert import constant_expr as _c
    return _c(input_alphabet, value, output_alphabet)


# ---------------------------------------------------------------------------
# rev and square.
# ---------------------------------------------------------------------------


def rev_after(e):
    """Reverse after the expression: flip every annotation order; leaf
    outputs of length at most one are their own reverse."""
    if isinstance(e, Leaf):
        return Leaf(e.simple, e.output_alphabet)
    return MapLex(e.order.reversed(), rev_after(e.inner))


def underline(sym):
    return sym + "'" if isinstance(sym, str) else ("underlined", sym)


def _flatten_orders(e):
    orders = []
    node = e
    while isinstance(node, MapLex):
        orders.append(node.order)
        node = node.inner
    return orders, node


def square_after(e, cap=DEFAULT_STATE_CAP):
    """Post-compose with the squaring transduction (one underlined copy per
    output position); the annotation stack is doubled and the leaf compares
    the two annotation groups."""
    out2 = Alphabet(e.output_alphabet.symbols
                    + tuple(underline(s) for s in e.output_alphabet.symbols))
    if isinstance(e, Leaf):
        mu = {q: tuple(underline(x) for x in w)
              for q, w in e.simple.mu.items()}
        return Leaf(SimpleTransducer(e.simple.dfa, mu), out2)

    orders, leaf = _flatten_orders(e)
    k = len(orders)
    sigma = e.input_alphabet
    t = leaf.simple

    def nest(base, depth):
        # all letters of base x B_1 x ... x B_depth as nested pairs
        syms = list(base)
        for j in range(depth):
            syms = [(s, b) for s in syms for b in orders[j].symbols]
        return syms

    inner_syms = nest(nest(sigma.symbols, k), k)
    inner_alpha = Alphabet(tuple(inner_syms))

    def split(sym):
        """Undo 2k nesting levels: (sigma letter, b-group, c-group)."""
        cs = []
        for _ in range(k):
            sym, x = sym
            cs.append(x)
        bs = []
        for _ in range(k):
            sym, x = sym
            bs.append(x)
        return sym, tuple(reversed(bs)), tuple(reversed(cs))

    def regroup(base, group):
        out = base
        for x in group:
            out = (out, x)
        return out

    # product of two copies of the leaf DFA plus an equality flag
    td = t.dfa
    state_ix = {}
    order_states = []

    def sid(s):
        if s not in state_ix:
            state_ix[s] = len(order_states)
            order_states.append(s)
        return state_ix[s]

    start = (td.delta.get((td.initial, LEFT_MARKER)),
             td.delta.get((td.initial, LEFT_MARKER)), True)
    if start[0] is None:
        raise MachineError("leaf transducer has no left-marker step")
    delta = {(0, LEFT_MARKER): 1 + sid(start)}
    queue = deque([start])
    seen = {start}
    while queue:
        cur = queue.popleft()
        (x, y, eq) = cur
        for sym in inner_syms:
            base, bs, cs = split(sym)
            x2 = td.delta.get((x, regroup(base, bs)))
            y2 = td.delta.get((y, regroup(base, cs)))
            if x2 is None or y2 is None:
                continue
            nxt = (x2, y2, eq and bs == cs)
            delta[(1 + sid(cur), sym)] = 1 + sid(nxt)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    finals = {}
    mu = {}
    n_prod = len(order_states)
    for s, i in list(state_ix.items()):
        (x, y, eq) = s
        xf = td.delta.get((x, RIGHT_MARKER))
        yf = td.delta.get((y, RIGHT_MARKER))
        if xf is None or yf is None:
            continue
        if xf not in td.finals or yf not in td.finals:
            continue
        wb, wc = t.mu[xf], t.mu[yf]
        if wb == ():
            out = ()
        elif eq:
            out = tuple(underline(g) for g in wc)
        else:
            out = wc
        fid = 1 + n_prod + len(finals)
        finals[(1 + i)] = (fid, out)
    for src, (fid, out) in finals.items():
        delta[(src, RIGHT_MARKER)] = fid
        mu[fid] = out
    num = 1 + n_prod + len(finals)
    dfa = Dfa(marked_alphabet(inner_alpha), num, 0,
              frozenset(f for (f, _o) in finals.values()), delta)
    sq_leaf = Leaf(SimpleTransducer(dfa, mu), out2)
    expr = sq_leaf
    for o in reversed(orders + orders):
        expr = MapLex(o, expr)
    return expr


# ---------------------------------------------------------------------------
# Disjoint sum.
# ---------------------------------------------------------------------------


def _tag_order(order, tag):
    return tuple((tag, b) for b in order.symbols)


def _pure_tag_language(pair_alpha, tag):
    trans = frozenset((0, s, 0) for s in pair_alpha.symbols
                      if s[1][0] == tag)
    return Nfa(pair_alpha, 1, 0, frozenset({0}), trans)


def _sum_same_level(e1, e2, dom_union):
    """Sum of two equal-level expressions with disjoint domains;
    dom_union is an Nfa over the shared input alphabet."""
    if isinstance(e1, Leaf) and isinstance(e2, Leaf):
        out = Alphabet(
            e1.output_alphabet.symbols
            + tuple(s for s in e2.output_alphabet.symbols
                    if s not in set(e1.output_alphabet.symbols)))
        parts = (transducer_to_sum(e1.simple).parts
                 + transducer_to_sum(e2.simple).parts)
        s = SimpleSum(e1.input_alphabet, parts)
        return Leaf(sum_to_transducer(s), out)
    sigma = e1.input_alphabet
    b = OrderedAlphabet(_tag_order(e1.order, "L") + _tag_order(e2.order, "R"))
    pair = product_alphabet(sigma, Alphabet(b.symbols))

    def side(e, tag, other_min):
        lifted = precompose_letter_map(
            e.inner, pair,
            lambda s: (s[0], s[1][1] if s[1][0] == tag else other_min))
        return lex_restrict(lifted, _pure_tag_language(pair, tag))

    g1 = side(e1, "L", e1.order.min_symbol)
    g2 = side(e2, "R", e2.order.min_symbol)
    # blocks mixing the two annotation parts contribute eps on domain words
    dom_lift = inverse_lift(dom_union, pair, lambda s: s[0])
    pure = boolean_op(_pure_tag_language(pair, "L"),
                      _pure_tag_language(pair, "R"), "union")
    c_lang = boolean_op(dom_lift, pure, "difference")
    eps_part = lex_restrict(
        constant_expr(pair, (), g1.output_alphabet), c_lang)
    inner = _sum_same_level(_sum_same_level(g1, g2, dom_union_lift(pair,
                                                                   dom_union)),
                            pad_to_level(eps_part, lex_level(g1)),
                            dom_union_lift(pair, dom_union))
    return MapLex(b, inner)


def dom_union_lift(pair, dom_union):
    return inverse_lift(dom_union, pair, lambda s: s[0])


def sum_lex(e1, e2):
    """Sum of two expressions with disjoint domains (checked, witness on
    overlap); the level is the max of the two."""
    if set(e1.input_alphabet.symbols) != set(e2.input_alphabet.symbols):
        raise AlphabetError("sum operands over different input alphabets")
    d1, d2 = lex_domain(e1), lex_domain(e2)
    w = intersection_witness(d1, d2)
    if w is not None:
        raise OverlapError("sum operands' domains overlap", w)
    k = max(lex_level(e1), lex_level(e2))
    e1, e2 = pad_to_level(e1, k), pad_to_level(e2, k)
    dom_union = boolean_op(d1, d2, "union")
    return _sum_same_level(e1, e2, dom_union)