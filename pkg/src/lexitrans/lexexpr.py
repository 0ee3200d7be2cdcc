"""Lexicographic expressions: a simple-transducer leaf wrapped in maplex
layers, with the direct evaluator that serves as the project-wide oracle.

An expression of level k over Sigma has a leaf over Sigma x B1 x ... x Bk
(letters nested pairwise, outermost order first).  Evaluation enumerates all
annotations of the input in lexicographic order and concatenates the leaf
outputs; the input is in the domain iff every block is.
"""

from dataclasses import dataclass

from .budget import AlphabetError, ensure_budget
from .orders import LEFT_MARKER, RIGHT_MARKER, OrderedAlphabet, lex_enum, word
from .automata import (Alphabet, Dfa, Nfa, complement, determinize_minimize,
                       inverse_lift, nfa_of_dfa, product_alphabet, project,
                       _complete)
from .simple import SimpleTransducer, marked_alphabet


@dataclass(frozen=True)
class Leaf:
    simple: SimpleTransducer
    output_alphabet: Alphabet

    @property
    def input_alphabet(self):
        return self.simple.content_alphabet


@dataclass(frozen=True)
class MapLex:
    order: OrderedAlphabet
    inner: object  # Leaf | MapLex

    def __post_init__(self):
        got = set(self.inner.input_alphabet.symbols)
        sigma = self.input_alphabet
        want = {(s, b) for s in sigma.symbols for b in self.order.symbols}
        if got != want:
            raise AlphabetError(
                "maplex inner alphabet must be exactly Sigma x B")

    @property
    def input_alphabet(self):
        seen = []
        for s in self.inner.input_alphabet.symbols:
            if not isinstance(s, tuple) or len(s) != 2:
                raise AlphabetError("maplex inner letters must be pairs")
            if s[0] not in seen:
                seen.append(s[0])
        from .simple import guess_arity
        return Alphabet(tuple(seen), arity=guess_arity(seen))

    @property
    def output_alphabet(self):
        return self.inner.output_alphabet


def lex_level(e):
    lvl = 0
    while isinstance(e, MapLex):
        lvl += 1
        e = e.inner
    return lvl


def leaf_of(e):
    while isinstance(e, MapLex):
        e = e.inner
    return e


def lex_eval(e, u, budget=None):
    """Evaluate an expression; None means out of domain."""
    from .simple import simple_run
    budget = ensure_budget(budget)
    u = word(u)
    symbols = set(e.input_alphabet.symbols)
    for sym in u:
        if sym not in symbols:
            raise AlphabetError(f"symbol {sym!r} not in input alphabet")
    return _eval(e, u, budget)


def _eval(e, u, budget):
    from .simple import simple_run
    if isinstance(e, Leaf):
        budget.charge()
        return simple_run(e.simple, u)
    # streamed enumeration with an in-place successor; annotations are never
    # materialized as a list of |B|^n words
    syms = e.order.symbols
    min_s, max_s = syms[0], syms[-1]
    succ = {s: syms[i + 1] for i, s in enumerate(syms[:-1])}
    ann = [min_s] * len(u)
    inner = e.inner
    out = []
    while True:
        piece = _eval(inner, tuple(zip(u, ann)), budget)
        if piece is None:
            return None
        out.extend(piece)
        for i in range(len(ann)):
            if ann[i] != max_s:
                ann[i] = succ[ann[i]]
                for j in range(i):
                    ann[j] = min_s
                break
        else:
            return tuple(out)


def flatten(e):
    """Rewrite nested maplex layers over one leaf on the flat product
    alphabet Sigma x B1 x ... x Bk (outermost order first).

    Returns (flat leaf transducer, list of orders, Sigma).
    """
    orders = []
    sigma = e.input_alphabet
    node = e
    while isinstance(node, MapLex):
        orders.append(node.order)
        node = node.inner
    t = node.simple
    k = len(orders)

    def flat(sym):
        parts = []
        for _ in range(k):
            sym, b = sym
            parts.append(b)
        return (sym,) + tuple(reversed(parts))

    if k == 0:
        return t, orders, sigma
    flat_content = product_alphabet(
        sigma, *[Alphabet(o.symbols) for o in orders])
    full = marked_alphabet(flat_content)
    delta = {}
    for (p, sym), q in t.dfa.delta.items():
        key = sym if sym in (LEFT_MARKER, RIGHT_MARKER) else flat(sym)
        delta[(p, key)] = q
    dfa = Dfa(full, t.dfa.num_states, t.dfa.initial, t.dfa.finals, delta)
    return SimpleTransducer(dfa, t.mu), orders, sigma


def simple_domain_nfa(t):
    """Domain of a simple transducer as an Nfa over its content alphabet."""
    content = t.content_alphabet
    start = t.dfa.delta.get((t.dfa.initial, LEFT_MARKER))
    if start is None:
        return Nfa(content, 1, 0, frozenset(), frozenset())
    finals = frozenset(q for (q, sym), r in t.dfa.delta.items()
                       if sym == RIGHT_MARKER and r in t.dfa.finals)
    trans = frozenset((p, sym, q) for (p, sym), q in t.dfa.delta.items()
                      if sym not in (LEFT_MARKER, RIGHT_MARKER))
    return Nfa(content, t.dfa.num_states, start, finals, trans)


def lex_domain(e):
    """Domain of an expression: complement of the Sigma-projection of the
    complement of the flattened leaf's domain."""
    t, orders, sigma = flatten(e)
    dom_s = simple_domain_nfa(t)
    if not orders:
        return nfa_of_dfa(determinize_minimize(dom_s))
    bad = complement(dom_s)
    bad_sigma = project(bad, 0)
    # project() derives its alphabet from the letters it sees; rebuild over
    # the declared Sigma so complement() completes over the right symbol set.
    bad_sigma = Nfa(sigma, bad_sigma.num_states, bad_sigma.initial,
                    bad_sigma.finals, bad_sigma.transitions)
    return complement(bad_sigma)


def restrict_simple(t, L):
    """Intersect a simple transducer's domain with a language over its
    content alphabet."""
    dL, _ = _complete(determinize_minimize(L))
    pre, ok, bad = "pre", "ok", "bad"
    states = {}
    order = []

    def idx(s):
        if s not in states:
            states[s] = len(order)
            order.append(s)
        return states[s]

    delta = {}
    start = idx((t.dfa.initial, pre))
    from collections import deque
    queue = deque([(t.dfa.initial, pre)])
    seen = {(t.dfa.initial, pre)}
    while queue:
        (p, x) = queue.popleft()
        moves = []
        if x == pre:
            q = t.dfa.delta.get((p, LEFT_MARKER))
            if q is not None:
                moves.append((LEFT_MARKER, (q, dL.initial)))
        elif x not in (ok, bad):
            for sym in t.content_alphabet.symbols:
                q = t.dfa.delta.get((p, sym))
                if q is not None:
                    moves.append((sym, (q, dL.delta[(x, sym)])))
            q = t.dfa.delta.get((p, RIGHT_MARKER))
            if q is not None:
                moves.append((RIGHT_MARKER,
                              (q, ok if x in dL.finals else bad)))
        for sym, tgt in moves:
            delta[(idx((p, x)), sym)] = idx(tgt)
            if tgt not in seen:
                seen.add(tgt)
                queue.append(tgt)
    finals = frozenset(states[(p, x)] for (p, x) in order
                       if x == ok and p in t.dfa.finals)
    dfa = Dfa(t.dfa.alphabet, len(order), start, finals, delta)
    mu = {states[(p, x)]: t.mu[p] for (p, x) in order
          if x == ok and p in t.dfa.finals}
    return SimpleTransducer(dfa, mu)


def lex_restrict(e, L):
    """Domain restriction; pushes the inverse projection of L down to the
    leaf, so the level never changes."""
    if set(L.alphabet.symbols) != set(e.input_alphabet.symbols):
        raise AlphabetError("restriction language over a different alphabet")
    if isinstance(e, Leaf):
        return Leaf(restrict_simple(e.simple, L), e.output_alphabet)
    pair_alpha = e.inner.input_alphabet
    lifted = inverse_lift(L, pair_alpha, lambda s: s[0])
    return MapLex(e.order, lex_restrict(e.inner, lifted))
