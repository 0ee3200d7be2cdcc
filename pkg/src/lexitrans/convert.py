"""Constructive conversions between the three presentations: expressions,
nested marble transducers, and automatic transductions.

The heavy constructions live here: the marble walker behind lex_to_nmt, the
excursion-table translation of nested marble automata to NFAs, state-passing
removal, and the traversal-alphabet encoding behind nmt_to_lex.
"""

from dataclasses import dataclass
from functools import reduce

from .budget import (AlphabetError, MachineError, LexitransError,
                     StateCapExceeded, DEFAULT_STATE_CAP)
from .orders import (LEFT_MARKER, RIGHT_MARKER, OrderedAlphabet, word)
from .automata import (Alphabet, Dfa, Nfa, SequentialTransducer, accepts,
                       boolean_op, codeterminize, complement,
                       determinize_minimize, inverse_lift, minimize_dfa,
                       nfa_of_dfa, product_alphabet, shortest_word, symkey,
                       universal_nfa)
from .simple import (SimpleSum, SimpleTransducer, marked_alphabet,
                     sum_to_transducer)
from .lexexpr import Leaf, MapLex, lex_domain, lex_level, simple_domain_nfa
from .nmt import LIFT, Nmt, spf_maps


# ---------------------------------------------------------------------------
# Expressions to nested marble transducers: the enumeration walker.
#
# One walker per maplex layer.  It lays down the all-minimal annotation right
# to left, calls the assistant, and then repeatedly seeks the leftmost
# non-maximal marble, bumps it, resets everything to its left and calls
# again; it accepts once every (real) position carries the maximal symbol.
#
# A machine cannot tell position 1 from any other interior position while
# descending blindly toward the left marker, yet after a call it must behave
# differently there than it did one step earlier on the way in.  Descents
# therefore alternate two marble flavors in lockstep with two descent states:
# the state at the left marker is always opposite in flavor to the marble it
# will re-read at position 1 after the call returns, so the post-return
# signature is fresh and can carry the seek logic.  The assistant only ever
# reads the value component.
# ---------------------------------------------------------------------------

_DA, _DB, _K, _ACC = 0, 1, 2, 3


def _walker_colors(order):
    return tuple(("A", b) for b in order.symbols) + \
        tuple(("B", b) for b in order.symbols)


def _adapt_leaf(leaf_t, raw2_content, strip2):
    """Simple transducer over the walker's convolution letters that runs the
    expression leaf on the stripped projection."""
    full = marked_alphabet(raw2_content)
    delta = {}
    for (p, sym), q in leaf_t.dfa.delta.items():
        if sym in (LEFT_MARKER, RIGHT_MARKER):
            delta[(p, sym)] = q
    for rawsym in raw2_content.symbols:
        stripped = strip2(rawsym)
        for p in range(leaf_t.dfa.num_states):
            if stripped is None:
                delta[(p, rawsym)] = p
            else:
                q = leaf_t.dfa.delta.get((p, stripped))
                if q is not None:
                    delta[(p, rawsym)] = q
    dfa = Dfa(full, leaf_t.dfa.num_states, leaf_t.dfa.initial,
              leaf_t.dfa.finals, delta)
    return SimpleTransducer(dfa, leaf_t.mu)


def _build_walker(order, inner_expr, raw_content, strip, out_alphabet):
    colors = _walker_colors(order)
    c0 = ("A", order.min_symbol)
    h_state = {b: 4 + i for i, b in enumerate(order.symbols)}
    num_states = 4 + len(order.symbols)
    bmin, bmax = order.min_symbol, order.max_symbol

    raw2_content = product_alphabet(marked_alphabet(raw_content),
                                    Alphabet(colors))

    def strip2(pair_sym):
        rawsym, color = pair_sym
        if rawsym in (LEFT_MARKER, RIGHT_MARKER):
            return None
        s = strip(rawsym)
        return None if s is None else (s, color[1])

    if isinstance(inner_expr, Leaf):
        inner_machine = _adapt_leaf(inner_expr.simple, raw2_content, strip2)
    else:
        inner_machine = _build_walker(inner_expr.order, inner_expr.inner,
                                      raw2_content, strip2, out_alphabet)

    delta = {}
    syms = raw_content.symbols + (RIGHT_MARKER,)

    def seek(v, sym):
        """Post-return / climb decision at a position holding value v."""
        if sym == RIGHT_MARKER:
            return (("B", bmin), _ACC)          # everything maximal: done
        if strip(sym) is None or v == bmax:
            return (LIFT, _K)
        return (LIFT, h_state[order.succ_symbol(v)])

    for sym in syms:
        for b in order.symbols:
            # descents alternate flavors in lockstep with the two states
            delta[(_DA, sym, ("A", b))] = (("B", bmin), _DB)
            delta[(_DB, sym, ("B", b))] = (("A", bmin), _DA)
            # fresh post-return signatures: opposite flavor under the head
            delta[(_DA, sym, ("B", b))] = seek(b, sym)
            delta[(_DB, sym, ("A", b))] = seek(b, sym)
            for f in ("A", "B"):
                delta[(_K, sym, (f, b))] = seek(b, sym)
                for hb, hq in h_state.items():
                    delta[(hq, sym, (f, b))] = (("A", hb), _DA)
    mu = {k: () for k in delta}
    call, ret = spf_maps(num_states, colors,
                         inner_machine.dfa.initial
                         if isinstance(inner_machine, SimpleTransducer)
                         else inner_machine.q0,
                         inner_machine.dfa.finals
                         if isinstance(inner_machine, SimpleTransducer)
                         else inner_machine.finals)
    return Nmt(raw_content, out_alphabet, colors, c0, num_states, _DA,
               frozenset({_ACC}), delta, mu, call, ret, inner_machine)


def lex_to_nmt(e):
    """Compile an expression into an equivalent nested marble transducer of
    the same level.  The result is structurally state-passing free and
    bottom producing."""
    if isinstance(e, Leaf):
        return e.simple
    return _build_walker(e.order, e.inner, e.input_alphabet,
                         lambda s: s, e.output_alphabet)


# ---------------------------------------------------------------------------
# Nested marble automata to NFAs.
#
# Stack discipline means a prefix region is virgin on every entry: an
# excursion into positions 0..i that starts by dropping (q, marble) onto i is
# a pure function of (q, marble).  Processing the word left to right, the
# table of excursion outcomes at i is computed from the table at i-1 and the
# letter; the tables are the states of a DFA for the domain.
#
# Assistant calls read the whole annotated word, so marbles are enriched with
# a summary of the assistant's behavior over the frozen suffix to the right:
# at level 1 the assistant is a DFA and the summary is its state-to-state map
# over the suffix; at higher levels the summary tracks, per (call state,
# return state) pair, the state of a co-deterministic automaton for that
# pair's language (built recursively), read backwards.
# ---------------------------------------------------------------------------

_DEAD, _ACCEPT = -2, -1


class _RhoPlugin:
    """Level 1: summarize the assistant DFA over the frozen suffix."""

    def __init__(self, t):
        self.t = t
        self.dfa = t.inner.dfa
        self.finals = t.inner.dfa.finals
        self.n = self.dfa.num_states
        self._cache = {}

    def seed(self):
        return tuple(self.dfa.delta.get((s, RIGHT_MARKER))
                     for s in range(self.n))

    def compose(self, e, sym, c):
        key = (e, sym, c)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        step = [self.dfa.delta.get((s, (sym, c))) for s in range(self.n)]
        out = tuple(None if step[s] is None else e[step[s]]
                    for s in range(self.n))
        self._cache[key] = out
        return out

    def call_eval(self, q, c, e):
        start = self.t.delta_call.get((q, c))
        if start is None:
            return _DEAD
        s = self.dfa.delta.get((start, LEFT_MARKER))
        if s is None:
            return _DEAD
        s = self.dfa.delta.get((s, (LEFT_MARKER, c)))
        if s is None:
            return _DEAD
        p = e[s]
        if p is None or p not in self.finals:
            return _DEAD
        ret = self.t.delta_ret.get((q, c, p))
        return _DEAD if ret is None else ret


class _PsiPlugin:
    """Level >= 2: track co-deterministic per-pair domain automata."""

    def __init__(self, t, cap):
        self.t = t
        inner = t.inner
        q_cs = sorted(set(t.delta_call.values()))
        self.pairs = []
        self.autos = []
        for qc in q_cs:
            for p in sorted(inner.finals):
                mod = _retarget(inner, qc, p)
                nfa = nma_to_nfa(mod, cap=cap)
                if shortest_word(nfa) is None:
                    continue
                d = codeterminize(nfa_of_dfa(determinize_minimize(nfa)),
                                  cap=cap)
                self.pairs.append((qc, p))
                self.autos.append((d, d.co_delta()))
        self._cache = {}

    def seed(self):
        return tuple(d.final for (d, _) in self.autos)

    def compose(self, e, sym, c):
        key = (e, sym, c)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = tuple(
            None if e[i] is None else self.autos[i][1].get((e[i], (sym, c)))
            for i in range(len(self.pairs)))
        self._cache[key] = out
        return out

    def call_eval(self, q, c, e):
        qcall = self.t.delta_call.get((q, c))
        if qcall is None:
            return _DEAD
        hits = []
        for i, (qc, p) in enumerate(self.pairs):
            if qc != qcall or e[i] is None:
                continue
            d, co = self.autos[i]
            s0 = co.get((e[i], (LEFT_MARKER, c)))
            if s0 is not None and s0 in d.initials:
                hits.append(p)
        if not hits:
            return _DEAD
        if len(hits) > 1:
            raise MachineError(
                "assistant returned two final states on one input")
        ret = self.t.delta_ret.get((q, c, hits[0]))
        return _DEAD if ret is None else ret


def _retarget(t, qc, p):
    """The machine t started at qc, accepting only at p; other finals are
    made stuck so runs that would have stopped there reject instead."""
    dead = set(t.finals) - {p}
    delta = {k: v for k, v in t.delta.items() if k[0] not in dead}
    mu = {k: v for k, v in t.mu.items() if k[0] not in dead}
    call = {k: v for k, v in t.delta_call.items() if k[0] not in dead}
    return Nmt(t.input_alphabet, t.output_alphabet, t.colors, t.c0,
               t.num_states, qc, frozenset({p}), delta, mu, call,
               t.delta_ret, t.inner)


class _TauEngine:
    """Excursion tables for one machine/plugin pair, plus the derived
    right-to-right traversal sets the validity construction needs."""

    def __init__(self, t, plugin, cap):
        from collections import deque
        self.t = t
        self.plugin = plugin
        self.cap = cap
        self.finals = t.finals
        self.nq = t.num_states
        self.seed_marble = (t.c0, plugin.seed())
        marbles = {self.seed_marble: 0}
        order = [self.seed_marble]
        queue = deque([self.seed_marble])
        all_syms = t.input_alphabet.symbols + (RIGHT_MARKER,)
        while queue:
            (c, e) = queue.popleft()
            for sym in all_syms:
                e2 = plugin.compose(e, sym, c)
                for c2 in t.colors:
                    m2 = (c2, e2)
                    if m2 not in marbles:
                        if len(marbles) >= cap:
                            raise StateCapExceeded(
                                "enriched marble cap exceeded")
                        marbles[m2] = len(order)
                        order.append(m2)
                        queue.append(m2)
        self.marbles = marbles
        self.marble_order = order
        self.nm = len(order)
        self.tau0 = tuple(self._base(q, mi)
                          for q in range(self.nq) for mi in range(self.nm))

    def _base(self, q, mi):
        if q in self.finals:
            return _ACCEPT
        c, e = self.marble_order[mi]
        return self.plugin.call_eval(q, c, e)

    def iterate(self, table, sym, q, mi):
        c, e = self.marble_order[mi]
        x = q
        seen = set()
        while True:
            if x in self.finals:
                return _ACCEPT
            if x in seen:
                return _DEAD
            seen.add(x)
            act = self.t.delta.get((x, sym, c))
            if act is None:
                return _DEAD
            tgt, x2 = act
            if tgt == LIFT:
                return x2
            m2 = self.marbles[(tgt, self.plugin.compose(e, sym, c))]
            sub = table[x2 * self.nm + m2]
            if sub < 0:
                return sub
            x = sub

    def step(self, table, sym):
        return tuple(self.iterate(table, sym, q, mi)
                     for q in range(self.nq) for mi in range(self.nm))

    def rr(self, table, sym, c, e):
        """Right-to-right traversals at a position bearing (c, e), with the
        prefix summarized by `table` (the excursion table one position to
        the left)."""
        pairs = set()
        for q1 in range(self.nq):
            pairs.add((q1, q1))
            x = q1
            seen = {q1}
            while True:
                if x in self.finals:
                    break
                act = self.t.delta.get((x, sym, c))
                if act is None:
                    break
                tgt, x2 = act
                if tgt == LIFT:
                    break
                key = (tgt, self.plugin.compose(e, sym, c))
                mi = self.marbles.get(key)
                if mi is None:
                    break
                sub = table[x2 * self.nm + mi]
                if sub < 0:
                    break
                x = sub
                pairs.add((q1, x))
                if x in seen:
                    break
                seen.add(x)
        return frozenset(pairs)

    def right_end_outcome(self, table):
        """Run the machine's right-marker phase against a prefix table."""
        c, e = self.seed_marble
        x = self.t.q0
        seen = set()
        while True:
            if x in self.finals:
                return True
            if x in seen:
                return False
            seen.add(x)
            act = self.t.delta.get((x, RIGHT_MARKER, c))
            if act is None:
                return False
            tgt, x2 = act
            if tgt == LIFT:
                return False  # lifting at the right marker is illegal
            m2 = self.marbles[(tgt, self.plugin.compose(e, RIGHT_MARKER, c))]
            sub = table[x2 * self.nm + m2]
            if sub == _ACCEPT:
                return True
            if sub == _DEAD:
                return False
            x = sub


def _tau_dfa(t, plugin, cap):
    from collections import deque
    eng = _TauEngine(t, plugin, cap)
    index = {eng.tau0: 0}
    tables = [eng.tau0]
    queue = deque([eng.tau0])
    delta = {}
    while queue:
        cur = queue.popleft()
        for sym in t.input_alphabet.symbols:
            nxt = eng.step(cur, sym)
            if nxt not in index:
                if len(index) >= cap:
                    raise StateCapExceeded("excursion table cap exceeded")
                index[nxt] = len(tables)
                tables.append(nxt)
                queue.append(nxt)
            delta[(index[cur], sym)] = index[nxt]
    fin = frozenset(i for tb, i in index.items()
                    if eng.right_end_outcome(tb))
    return Dfa(t.input_alphabet, len(tables), 0, fin, delta)


def nma_to_nfa(a, cap=DEFAULT_STATE_CAP):
    """The language (domain) of a nested marble automaton as an NFA.

    Outputs are irrelevant and ignored; level k > 1 machines are reduced via
    recursively built co-deterministic per-pair automata of the assistant."""
    if isinstance(a, SimpleTransducer):
        return nfa_of_dfa(determinize_minimize(simple_domain_nfa(a)))
    if isinstance(a.inner, SimpleTransducer):
        plugin = _RhoPlugin(a)
    else:
        plugin = _PsiPlugin(a, cap)
    d = _tau_dfa(a, plugin, cap)
    return nfa_of_dfa(minimize_dfa(d))


def nmt_domain(t, cap=DEFAULT_STATE_CAP):
    """Regular domain of a nested marble transducer."""
    return nma_to_nfa(t, cap=cap)


# ---------------------------------------------------------------------------
# State-passing removal.
# ---------------------------------------------------------------------------


def _project_machine(m, new_content, letter_map):
    """Rewire a machine to read letters of new_content, each translated
    letterwise by letter_map (markers stay markers).  Length preserving."""
    if isinstance(m, SimpleTransducer):
        full = marked_alphabet(new_content)
        delta = {}
        for p in range(m.dfa.num_states):
            for mk in (LEFT_MARKER, RIGHT_MARKER):
                q = m.dfa.delta.get((p, mk))
                if q is not None:
                    delta[(p, mk)] = q
            for sym in new_content.symbols:
                q = m.dfa.delta.get((p, letter_map(sym)))
                if q is not None:
                    delta[(p, sym)] = q
        dfa = Dfa(full, m.dfa.num_states, m.dfa.initial, m.dfa.finals, delta)
        return SimpleTransducer(dfa, m.mu)
    delta, mu = {}, {}
    for sym in new_content.symbols + (RIGHT_MARKER,):
        old = sym if sym == RIGHT_MARKER else letter_map(sym)
        for c in m.colors:
            for q in range(m.num_states):
                act = m.delta.get((q, old, c))
                if act is not None:
                    delta[(q, sym, c)] = act
                    mu[(q, sym, c)] = m.mu[(q, old, c)]
    inner_content = product_alphabet(marked_alphabet(new_content),
                                     Alphabet(m.colors))

    def lifted(pair):
        ell, c = pair
        if ell in (LEFT_MARKER, RIGHT_MARKER):
            return (ell, c)
        return (letter_map(ell), c)

    inner = _project_machine(m.inner, inner_content, lifted)
    return Nmt(new_content, m.output_alphabet, m.colors, m.c0, m.num_states,
               m.q0, m.finals, delta, mu, m.delta_call, m.delta_ret, inner)


def _eps_guard(m, dispatch_starts, dummy_letter, content=None):
    """Extend an assistant so calls on dummy-padded annotations accept
    immediately with eps output.

    For a DFA assistant, any dummy letter routes to an accepting eps sink.
    For a machine assistant, a bounded detour from the right end drops twice,
    inspects the second-to-last content letter (dummy padded exactly on the
    guarded calls, which blanket everything left of the right marker), lifts
    back and hands off; each dispatchable start state gets its own detour
    copy.  Needs content length >= 2, which convolutions always satisfy.

    `content` is the runtime content alphabet, which may strictly contain
    the wrapped machine's own (the caller's marbles ride in the letters).

    Returns (guarded machine, start -> rerouted start, eps final state)."""
    if content is None:
        content = m.content_alphabet if isinstance(m, SimpleTransducer) \
            else m.input_alphabet
    if isinstance(m, SimpleTransducer):
        n = m.dfa.num_states
        run, fin = n, n + 1
        delta = dict(m.dfa.delta)
        for sym in content.symbols:
            if dummy_letter(sym):
                for p in range(n):
                    delta[(p, sym)] = run
            delta[(run, sym)] = run
        delta[(run, RIGHT_MARKER)] = fin
        dfa = Dfa(marked_alphabet(content), n + 2, m.dfa.initial,
                  m.dfa.finals | {fin}, delta)
        mu = dict(m.mu)
        mu[fin] = ()
        t = SimpleTransducer(dfa, mu)
        return t, {s: s for s in dispatch_starts}, fin

    # a start that is itself accepting stops before reading anything, so the
    # guard never matters for it and it keeps its identity
    starts = sorted((set(dispatch_starts) | {m.q0}) - set(m.finals))
    base = m.num_states
    det = {s: base + 5 * i for i, s in enumerate(starts)}
    acc = base + 5 * len(starts)
    delta = dict(m.delta)
    mu = dict(m.mu)

    def add(key, act):
        delta[key] = act
        mu[key] = ()

    for s in starts:
        d0 = det[s]
        add((d0, RIGHT_MARKER, m.c0), (m.c0, d0 + 1))
        for sym in content.symbols:
            add((d0 + 1, sym, m.c0), (m.c0, d0 + 2))
            if dummy_letter(sym):
                add((d0 + 2, sym, m.c0), (m.c0, acc))
            else:
                add((d0 + 2, sym, m.c0), (LIFT, d0 + 3))
            add((d0 + 3, sym, m.c0), (LIFT, d0 + 4))
        # back on the right marker: act exactly as s would have
        act = m.delta.get((s, RIGHT_MARKER, m.c0))
        if act is not None:
            delta[(d0 + 4, RIGHT_MARKER, m.c0)] = act
            mu[(d0 + 4, RIGHT_MARKER, m.c0)] = m.mu[(s, RIGHT_MARKER, m.c0)]
    reroute = {s: det.get(s, s) for s in set(dispatch_starts) | {m.q0}}
    guarded = Nmt(content, m.output_alphabet, m.colors, m.c0,
                  acc + 1, m.q0, m.finals | {acc}, delta, mu,
                  m.delta_call, m.delta_ret, m.inner)
    return guarded, reroute, acc


_DWA, _DWB = ("dispatch", "A"), ("dispatch", "B")


def remove_call_passing(t):
    """Make the call function constant by tagging every dropped marble with
    the target state of its drop; the left-marker marble then names the
    calling state and the assistant recovers its proper start state from it.

    A DFA assistant reads left to right and branches on the first letter for
    free.  A machine assistant gets a prologue: it blankets the word with
    dispatch dummies, makes an eps call, reads the dispatch letter at
    position 1 on the way back out, climbs home and continues as the proper
    assistant from the recovered start state."""
    if isinstance(t, SimpleTransducer):
        return t
    colors2 = tuple((c, q) for c in t.colors for q in range(t.num_states))
    c0_2 = (t.c0, t.q0)
    delta2, mu2 = {}, {}
    for (q, sym, c), (x, q2) in t.delta.items():
        for p in range(t.num_states):
            act = (LIFT, q2) if x == LIFT else ((x, q2), q2)
            delta2[(q, sym, (c, p))] = act
            mu2[(q, sym, (c, p))] = t.mu[(q, sym, c)]
    raw2 = product_alphabet(marked_alphabet(t.input_alphabet),
                            Alphabet(colors2))
    if isinstance(t.inner, SimpleTransducer):
        wrapped = _dispatch_dfa_assistant(t, raw2)
        w_init = wrapped.dfa.initial
        w_finals = wrapped.dfa.finals
        ret2 = {(q, (c, p), pf): t.delta_ret[(q, c, pf)]
                for q in range(t.num_states) for c in t.colors
                for p in range(t.num_states) for pf in w_finals
                if (q, c, pf) in t.delta_ret}
    else:
        wrapped, eps_fin = _dispatch_machine_assistant(t, raw2)
        w_init = wrapped.q0
        w_finals = set(t.inner.finals)
        ret2 = {(q, (c, p), pf): t.delta_ret[(q, c, pf)]
                for q in range(t.num_states) for c in t.colors
                for p in range(t.num_states) for pf in w_finals
                if (q, c, pf) in t.delta_ret}
    call2 = {(q, c2): w_init for q in range(t.num_states) for c2 in colors2}
    return Nmt(t.input_alphabet, t.output_alphabet, colors2, c0_2,
               t.num_states, t.q0, t.finals, delta2, mu2, call2, ret2,
               wrapped)


def _dispatch_dfa_assistant(t, raw2):
    inner = t.inner
    n = inner.dfa.num_states
    w0, w1 = n, n + 1
    delta = {(w0, LEFT_MARKER): w1}
    for (c, q) in ((c, q) for c in t.colors for q in range(t.num_states)):
        start = t.delta_call.get((q, c))
        if start is None:
            continue
        x = inner.dfa.delta.get((start, LEFT_MARKER))
        if x is None:
            continue
        x = inner.dfa.delta.get((x, (LEFT_MARKER, c)))
        if x is None:
            continue
        delta[(w1, (LEFT_MARKER, (c, q)))] = x
    for p in range(n):
        q2 = inner.dfa.delta.get((p, RIGHT_MARKER))
        if q2 is not None:
            delta[(p, RIGHT_MARKER)] = q2
        for sym2 in raw2.symbols:
            ell, (c, _st) = sym2
            if ell == LEFT_MARKER:
                continue
            q2 = inner.dfa.delta.get((p, (ell, c)))
            if q2 is not None:
                delta[(p, sym2)] = q2
    dfa = Dfa(marked_alphabet(raw2), n + 2, w0, inner.dfa.finals, delta)
    return SimpleTransducer(dfa, inner.mu)


def _dispatch_machine_assistant(t, raw2):
    inner = t.inner

    def proj(sym2):
        ell, (c, _st) = sym2
        return (ell, c)

    body = _project_machine(inner, raw2, proj)
    starts = set(body.delta_call.values()) | {body.q0}
    guarded_inner, reroute, eps_fin = _eps_guard(
        body.inner, sorted(starts),
        lambda pair: pair[1] in (_DWA, _DWB),
        content=product_alphabet(marked_alphabet(raw2),
                                 Alphabet(body.colors + (_DWA, _DWB))))
    call_b = {k: reroute[v] for k, v in body.delta_call.items()}
    base = body.num_states
    pwa, pwb = base, base + 1
    climb = {x: base + 2 + i for i, x in enumerate(range(inner.num_states))}
    total = base + 2 + inner.num_states
    colors_w = body.colors + (_DWA, _DWB)
    delta = dict(body.delta)
    mu = dict(body.mu)

    def add(key, act, out=()):
        delta[key] = act
        mu[key] = out

    content = raw2.symbols
    add((pwa, RIGHT_MARKER, body.c0), (_DWB, pwb))
    for sym2 in content:
        add((pwa, sym2, _DWA), (_DWB, pwb))
        add((pwb, sym2, _DWB), (_DWA, pwa))
        # fresh post-return signatures carry the dispatch letter at position 1
        ell, (c, q) = sym2
        if ell == LEFT_MARKER:
            x = t.delta_call.get((q, c))
            if x is not None:
                # an accepting start stops the proper assistant on the spot,
                # so enter it directly and keep its identity
                tgt = x if x in inner.finals else climb[x]
                add((pwa, sym2, _DWB), (LIFT, tgt))
                add((pwb, sym2, _DWA), (LIFT, tgt))
        for cx in climb.values():
            add((cx, sym2, _DWA), (LIFT, cx))
            add((cx, sym2, _DWB), (LIFT, cx))
    for x, cx in climb.items():
        act = body.delta.get((x, RIGHT_MARKER, body.c0))
        if act is not None:
            delta[(cx, RIGHT_MARKER, body.c0)] = act
            mu[(cx, RIGHT_MARKER, body.c0)] = body.mu[
                (x, RIGHT_MARKER, body.c0)]
    call = dict(call_b)
    ret = dict(body.delta_ret)
    for st in (pwa, pwb):
        for d in (_DWA, _DWB):
            call[(st, d)] = reroute[body.q0]
            ret[(st, d, eps_fin)] = st
    wrapped = Nmt(raw2, body.output_alphabet, colors_w, body.c0,
                  total, pwa, body.finals, delta, mu, call, ret,
                  guarded_inner)
    return wrapped, eps_fin


def _first_accept_nfa(m, start, p):
    """Words on which the assistant, started at `start`, stops accepting
    exactly at final state p; over the assistant's content alphabet."""
    if isinstance(m, SimpleTransducer):
        content = m.content_alphabet
        init = m.dfa.delta.get((start, LEFT_MARKER))
        if init is None:
            return Nfa(content, 1, 0, frozenset(), frozenset())
        pre = frozenset(x for (x, sym), r in m.dfa.delta.items()
                        if sym == RIGHT_MARKER and r == p)
        trans = frozenset((a, sym, b) for (a, sym), b in m.dfa.delta.items()
                          if sym not in (LEFT_MARKER, RIGHT_MARKER))
        return Nfa(content, m.dfa.num_states, init, pre, trans)
    return nma_to_nfa(_retarget(m, start, p))


_LIFTED = "lifted"


def remove_return_passing(t, cap=DEFAULT_STATE_CAP):
    """Remove return-state passing: the call function must already be
    constant.  Marbles are enriched with, per assistant final state, the
    state of a co-deterministic automaton for that final's language, read
    backwards over the frozen suffix; the drop toward the left marker can
    then precompute the assistant's final state and the drop's target state
    is chosen as the original return state up front.

    The assistant is made state-passing free recursively, and calls are only
    made when the precomputation found an accepting final, so every call
    accepts.  A parity bit on the marbles keeps the just-dropped marble
    distinguishable from the one re-read after the call returns."""
    if isinstance(t, SimpleTransducer):
        return t
    starts = set(t.delta_call.values())
    if len(starts) > 1:
        raise MachineError("remove_return_passing needs a constant call "
                           "function; run remove_call_passing first")
    q_c = starts.pop() if starts else inner_initial_state(t.inner)
    inner_spf = make_spf(t.inner, cap=cap)
    live = []
    for p in sorted(machine_finals(t.inner)):
        nfa = _first_accept_nfa(t.inner, q_c, p)
        if shortest_word(nfa) is None:
            continue
        d = codeterminize(nfa_of_dfa(determinize_minimize(nfa)), cap=cap)
        live.append((p, d, d.co_delta()))
    seed = tuple(d.final for (_p, d, _co) in live)
    compose_cache = {}

    def compose(psi, sym, c):
        key = (psi, sym, c)
        hit = compose_cache.get(key)
        if hit is None:
            hit = tuple(
                None if psi[i] is None
                else live[i][2].get((psi[i], (sym, c)))
                for i in range(len(live)))
            compose_cache[key] = hit
        return hit

    def precomputed_final(c, psi):
        hits = []
        for i, (p, d, co) in enumerate(live):
            if psi[i] is None:
                continue
            s0 = co.get((psi[i], (LEFT_MARKER, c)))
            if s0 is not None and s0 in d.initials:
                hits.append(p)
        if len(hits) > 1:
            raise MachineError("assistant finals not disjoint")
        return hits[0] if hits else None

    # enriched marble closure: (color, psi, parity), discovery order
    from collections import deque
    c0_2 = (t.c0, seed, 0)
    marble_order = [c0_2]
    marbles = {c0_2}
    queue = deque([c0_2])
    syms = t.input_alphabet.symbols + (RIGHT_MARKER,)
    while queue:
        (c, psi, par) = queue.popleft()
        for sym in syms:
            psi2 = compose(psi, sym, c)
            for c2 in t.colors:
                m2 = (c2, psi2, 1 - par)
                if m2 not in marbles:
                    if len(marbles) >= cap:
                        raise StateCapExceeded("marble closure cap")
                    marbles.add(m2)
                    marble_order.append(m2)
                    queue.append(m2)
    colors2 = tuple(marble_order)

    # states: (q, ("m", marble)) for drop targets, (q, "lifted") for lifts
    state_ix = {}
    states = []

    def sid(s):
        if s not in state_ix:
            state_ix[s] = len(states)
            states.append(s)
        return state_ix[s]

    def ret_state(q, m2):
        c2, psi2, _par = m2
        p = precomputed_final(c2, psi2)
        if p is None:
            return None
        return t.delta_ret.get((q, c2, p))

    inner2 = _project_machine(inner_spf, product_alphabet(
        marked_alphabet(t.input_alphabet), Alphabet(colors2)),
        lambda pair: (pair[0], pair[1][0]))
    in2_init = inner_initial_state(inner2)
    in2_finals = machine_finals(inner2)

    delta2, mu2, call2, ret2 = {}, {}, {}, {}
    acc_sink = ("acc", None)
    q0_2 = sid((t.q0, ("m", c0_2)))
    sid(acc_sink)
    worklist = deque([(t.q0, ("m", c0_2))])
    seen = {(t.q0, ("m", c0_2)), acc_sink}

    def act_for(q_eff, sym, m2):
        """Translate the original transition of q_eff into the new machine."""
        act = t.delta.get((q_eff, sym, m2[0]))
        if act is None:
            return None
        x, q2 = act
        out = t.mu[(q_eff, sym, m2[0])]
        if x == LIFT:
            return (LIFT, (q2, _LIFTED)), out
        m_new = (x, compose(m2[1], sym, m2[0]), 1 - m2[2])
        return ((m_new, (q2, ("m", m_new))), out)

    while worklist:
        s = worklist.popleft()
        q, tag = s
        if q in t.finals:
            continue  # accepting: the run stops here, no transitions needed
        for sym in syms:
            for m2 in colors2:
                if tag == _LIFTED or ("m", m2) == tag:
                    eff = q
                elif tag[0] == "m":
                    # parity makes the re-read after a call unmistakable for
                    # the marble this state just dropped
                    r = ret_state(q, tag[1])
                    if r is None:
                        continue
                    if r in t.finals:
                        m_new = (m2[0], compose(m2[1], sym, m2[0]),
                                 1 - m2[2])
                        delta2[(sid(s), sym, m2)] = (m_new, sid(acc_sink))
                        mu2[(sid(s), sym, m2)] = ()
                        continue
                    eff = r
                else:
                    continue
                res = act_for(eff, sym, m2)
                if res is None:
                    continue
                (x, s2), out = res
                delta2[(sid(s), sym, m2)] = (x, sid(s2))
                mu2[(sid(s), sym, m2)] = out
                if s2 not in seen:
                    seen.add(s2)
                    worklist.append(s2)
        if tag != _LIFTED and tag[0] == "m":
            m2 = tag[1]
            if precomputed_final(m2[0], m2[1]) is not None:
                call2[(sid(s), m2)] = in2_init
                for pf in in2_finals:
                    ret2[(sid(s), m2, pf)] = sid(s)

    finals2 = frozenset(
        state_ix[s] for s in states
        if s == acc_sink or (isinstance(s[0], int) and s[0] in t.finals))
    return Nmt(t.input_alphabet, t.output_alphabet, colors2, c0_2,
               len(states), q0_2, finals2, delta2, mu2, call2, ret2,
               inner2)


def inner_initial_state(m):
    return m.dfa.initial if isinstance(m, SimpleTransducer) else m.q0


def machine_finals(m):
    return m.dfa.finals if isinstance(m, SimpleTransducer) else m.finals


def make_spf(t, cap=DEFAULT_STATE_CAP):
    """The full state-passing removal pipeline."""
    if isinstance(t, SimpleTransducer):
        return t
    return remove_return_passing(remove_call_passing(t), cap=cap)


# ---------------------------------------------------------------------------
# Bottom-producing normalization: outputs only at the level-0 leaf.
#
# A transition that would emit w instead drops a w-indexed marble, walks to
# the left marker under alternating dummies and calls the assistant once per
# letter of w; the extended assistant spots the w-marble on its input and
# produces that single letter.  The machine then lifts its way back, restores
# the marble and finally performs the original transition silently.
# ---------------------------------------------------------------------------

_BPA, _BPB = ("bp", "A"), ("bp", "B")


def _emit_dfa_assistant(inner, content2):
    """DFA assistant extended to emit w[j] when a ("w", w, j) marble shows up
    anywhere on its input."""
    n = inner.dfa.num_states
    wait = n
    sink = {}
    letters = []
    for sym in content2.symbols:
        m = sym[1]
        if isinstance(m, tuple) and m and m[0] == "w":
            g = m[1][m[2] - 1]
            if g not in letters:
                letters.append(g)
    for i, g in enumerate(letters):
        sink[g] = (n + 1 + 2 * i, n + 2 + 2 * i)  # consume state, final
    delta = {}
    for p in range(n):
        for mk in (LEFT_MARKER, RIGHT_MARKER):
            q = inner.dfa.delta.get((p, mk))
            if q is not None:
                delta[(p, mk)] = q
    for sym in content2.symbols:
        ell, m = sym
        dummy = m in (_BPA, _BPB)
        wmark = isinstance(m, tuple) and len(m) == 3 and m[0] == "w"
        for p in range(n):
            if dummy:
                delta[(p, sym)] = wait
            elif wmark:
                delta[(p, sym)] = sink[m[1][m[2] - 1]][0]
            else:
                q = inner.dfa.delta.get((p, (ell, m)))
                if q is not None:
                    delta[(p, sym)] = q
        if wmark:
            delta[(wait, sym)] = sink[m[1][m[2] - 1]][0]
        else:
            delta[(wait, sym)] = wait
        for g, (cons, _fin) in sink.items():
            delta[(cons, sym)] = cons
    for g, (cons, fin) in sink.items():
        delta[(cons, RIGHT_MARKER)] = fin
    # dummy-blanketed inputs without any w marble are eps calls
    eps_fin = n + 1 + 2 * len(letters)
    delta[(wait, RIGHT_MARKER)] = eps_fin
    num = eps_fin + 1
    dfa = Dfa(marked_alphabet(content2), num, inner.dfa.initial,
              inner.dfa.finals | {f for (_c, f) in sink.values()} | {eps_fin},
              delta)
    mu = dict(inner.mu)
    for g, (_c, f) in sink.items():
        mu[f] = (g,)
    mu[eps_fin] = ()
    return SimpleTransducer(dfa, mu)


def _emit_machine_assistant(inner, content2):
    """Machine assistant wrapped with a scan prologue: blanket the word,
    make an eps call, scan for a w-marble while climbing back; emit its
    letter if found, otherwise behave as the original assistant."""
    base = inner.num_states
    pa, pb = base, base + 1
    # scan states: "nothing seen" and one per emitted letter
    letters = []
    for sym in content2.symbols:
        m = sym[1]
        if isinstance(m, tuple) and len(m) == 3 and m[0] == "w":
            g = m[1][m[2] - 1]
            if g not in letters:
                letters.append(g)
    scan_none = base + 2
    scan_hit = {g: base + 3 + i for i, g in enumerate(letters)}
    acc = base + 3 + len(letters)
    colors2 = inner.colors + (_BPA, _BPB)
    delta = dict(inner.delta)
    mu = dict(inner.mu)
    guarded_inner, reroute, eps_fin = _eps_guard(
        inner.inner, sorted(set(inner.delta_call.values()) |
                            {inner_initial_state(inner.inner)}),
        lambda pair: pair[1] in (_BPA, _BPB),
        content=product_alphabet(marked_alphabet(content2),
                                 Alphabet(inner.colors + (_BPA, _BPB))))
    call = {k: reroute.get(v, v) for k, v in inner.delta_call.items()}
    ret = dict(inner.delta_ret)

    def add(key, act, out=()):
        delta[key] = act
        mu[key] = out

    def classify(sym):
        m = sym[1]
        if isinstance(m, tuple) and len(m) == 3 and m[0] == "w":
            return m[1][m[2] - 1]
        return None

    add((pa, RIGHT_MARKER, inner.c0), (_BPB, pb))
    for sym in content2.symbols:
        add((pa, sym, _BPA), (_BPB, pb))
        add((pb, sym, _BPB), (_BPA, pa))
        g = classify(sym)
        first = scan_hit[g] if g is not None else scan_none
        add((pa, sym, _BPB), (LIFT, first))
        add((pb, sym, _BPA), (LIFT, first))
        for st in (scan_none,) + tuple(scan_hit.values()):
            nxt = st
            if g is not None and st == scan_none:
                nxt = scan_hit[g]
            add((st, sym, _BPA), (LIFT, nxt))
            add((st, sym, _BPB), (LIFT, nxt))
    act = inner.delta.get((inner.q0, RIGHT_MARKER, inner.c0))
    if act is not None:
        delta[(scan_none, RIGHT_MARKER, inner.c0)] = act
        mu[(scan_none, RIGHT_MARKER, inner.c0)] = inner.mu[
            (inner.q0, RIGHT_MARKER, inner.c0)]
    for g, st in scan_hit.items():
        add((st, RIGHT_MARKER, inner.c0), (inner.c0, acc), (g,))
    for st in (pa, pb):
        for d in (_BPA, _BPB):
            call[(st, d)] = reroute[inner_initial_state(inner.inner)]
            ret[(st, d, eps_fin)] = st
    return Nmt(content2, inner.output_alphabet, colors2, inner.c0,
               acc + 1, pa, inner.finals | {acc}, delta, mu, call, ret,
               guarded_inner)


def bottom_producing(t):
    """Equivalent machine whose output function is constantly eps at every
    level above the leaf.  Expects (dynamic) state-passing freeness."""
    from .nmt import is_bottom_producing
    if isinstance(t, SimpleTransducer) or is_bottom_producing(t):
        return t
    words = sorted({w for w in t.mu.values() if w != ()})
    wmarks = tuple(("w", w, j) for w in words for j in range(1, len(w) + 1))
    colors2 = t.colors + tuple(
        c for c in wmarks + (_BPA, _BPB) if c not in set(t.colors))
    content2 = product_alphabet(marked_alphabet(t.input_alphabet),
                                Alphabet(colors2))
    base = t.num_states
    state_ix = {}
    extras = []

    def sid(tag):
        if tag not in state_ix:
            state_ix[tag] = base + len(extras)
            extras.append(tag)
        return state_ix[tag]

    delta, mu = {}, {}
    for key, (x, q2) in t.delta.items():
        w = t.mu[key]
        if w == ():
            delta[key] = (x, q2)
            mu[key] = ()
            continue
        q, sym, c = key
        delta[key] = (("w", w, 1), sid(("dsb", key, 1)))
        mu[key] = ()
        for j in range(1, len(w) + 1):
            dsb, dsa = sid(("dsb", key, j)), sid(("dsa", key, j))
            climb, nxt = sid(("climb", key, j)), sid(("next", key, j))
            for sym2 in t.input_alphabet.symbols + (RIGHT_MARKER,):
                # lockstep descent: the w marble counts as an A-flavored one
                delta[(dsb, sym2, ("w", w, j))] = (_BPB, dsa)
                delta[(dsb, sym2, _BPA)] = (_BPB, dsa)
                delta[(dsa, sym2, _BPB)] = (_BPA, dsb)
                # fresh post-return reads
                delta[(dsa, sym2, _BPA)] = (LIFT, climb)
                delta[(dsb, sym2, _BPB)] = (LIFT, climb)
                delta[(dsa, sym2, ("w", w, j))] = (LIFT, nxt)
                delta[(climb, sym2, _BPA)] = (LIFT, climb)
                delta[(climb, sym2, _BPB)] = (LIFT, climb)
                delta[(climb, sym2, ("w", w, j))] = (LIFT, nxt)
            # i = 1: the excursion marble sat on the left marker and was
            # popped by the call, so the original marble is re-read directly
            follow = ((x, q2) if j == len(w)
                      else (("w", w, j + 1), sid(("dsb", key, j + 1))))
            delta[(dsb, sym, c)] = follow
            delta[(nxt, sym, c)] = follow
    for key in list(delta.keys()):
        if key not in mu:
            mu[key] = ()
    if isinstance(t.inner, SimpleTransducer):
        assistant = _emit_dfa_assistant(t.inner, content2)
        a_init = assistant.dfa.initial
        a_finals = assistant.dfa.finals
    else:
        assistant = bottom_producing(_emit_machine_assistant(t.inner,
                                                             content2))
        a_init = assistant.q0
        a_finals = assistant.finals
    num = base + len(extras)
    call, ret = spf_maps(num, colors2, a_init, a_finals)
    return Nmt(t.input_alphabet, t.output_alphabet, colors2, t.c0, num,
               t.q0, t.finals, delta, mu, call, ret, assistant)


def _union(alphabet, nfas):
    nfas = list(nfas)
    if not nfas:
        return Nfa(alphabet, 1, 0, frozenset(), frozenset())
    return reduce(lambda a, b: boolean_op(a, b, "union"), nfas)


def constant_expr(input_alphabet, value, output_alphabet):
    """Level-0 expression defined on all of Sigma* with constant output."""
    full = marked_alphabet(input_alphabet)
    delta = {(0, LEFT_MARKER): 1, (1, RIGHT_MARKER): 2}
    for sym in input_alphabet.symbols:
        delta[(1, sym)] = 1
    dfa = Dfa(full, 3, 0, frozenset({2}), delta)
    return Leaf(SimpleTransducer(dfa, {2: word(value)}), output_alphabet)


def morphism_to_lex(psi, input_alphabet, output_alphabet):
    """A letter-to-word morphism as an expression of level <= 1.

    Annotations over {0..M} pick at most one output-letter index per
    position; the annotation marking position i with index j selects letter j
    of psi(u[i]).
    """
    psi = {s: word(v) for s, v in psi.items()}
    if set(psi.keys()) != set(input_alphabet.symbols):
        raise AlphabetError("morphism must be total on the input alphabet")
    m = max((len(v) for v in psi.values()), default=0)
    if m == 0:
        return constant_expr(input_alphabet, (), output_alphabet)
    lam = OrderedAlphabet(tuple(range(m + 1)))
    pair = product_alphabet(input_alphabet, Alphabet(lam.symbols))
    parts = []
    gammas = []
    for v in psi.values():
        for g in v:
            if g not in gammas:
                gammas.append(g)
    for g in gammas:
        hits = [(s, i + 1) for s, v in psi.items()
                for i in range(len(v)) if v[i] == g]
        zero_loop = [(0, (s, 0), 0) for s in input_alphabet.symbols]
        zero_loop += [(1, (s, 0), 1) for s in input_alphabet.symbols]
        mark = [(0, (s, i), 1) for (s, i) in hits]
        nfa = Nfa(pair, 2, 0, frozenset({1}),
                  frozenset(zero_loop + mark))
        parts.append((nfa, (g,)))
    l_eps = complement(_union(pair, [p for p, _ in parts]))
    s = SimpleSum(pair, tuple(parts) + ((l_eps, ()),))
    return MapLex(lam, Leaf(sum_to_transducer(s), output_alphabet))


def seq_to_lex(t, output_alphabet=None):
    """A sequential transducer as a level-1 expression.

    Valid annotations carry the (unique) accepting run in one track and mark
    exactly one output-letter index; enumerating them in lexicographic order
    replays the outputs left to right, letter by letter.
    """
    sigma = t.dfa.alphabet
    if output_alphabet is None:
        letters = []
        for (q, sym) in sorted(t.output, key=lambda k: (k[0], symkey(k[1]))):
            for g in t.output[(q, sym)]:
                if g not in letters:
                    letters.append(g)
        output_alphabet = Alphabet(tuple(letters))
    m = max((len(v) for v in t.output.values()), default=0)
    if m == 0:
        dom = nfa_of_dfa(t.dfa)
        from .lexexpr import lex_restrict
        return lex_restrict(constant_expr(sigma, (), output_alphabet), dom)
    b_syms = tuple((q, j) for j in range(m + 1)
                   for q in range(t.dfa.num_states))
    lam = OrderedAlphabet(b_syms)  # j = 0 plays bottom, then 1..m
    pair = product_alphabet(sigma, Alphabet(b_syms))

    def run_nfa(select):
        """Annotated words following the run, marking one position where
        select(prev_state, sym, index) approves; None marks nothing yet."""
        idx = {}
        order = []

        def sid(s):
            if s not in idx:
                idx[s] = len(order)
                order.append(s)
            return idx[s]

        trans = set()
        start = sid((t.dfa.initial, False))
        for q in range(t.dfa.num_states):
            for sym in sigma.symbols:
                q2 = t.dfa.delta.get((q, sym))
                if q2 is None:
                    continue
                for seen in (False, True):
                    trans.add((sid((q, seen)), (sym, (q2, 0)),
                               sid((q2, seen))))
                if select is not None:
                    for j in range(1, len(t.output[(q, sym)]) + 1):
                        if select(q, sym, j):
                            trans.add((sid((q, False)), (sym, (q2, j)),
                                       sid((q2, True))))
        finals = frozenset(sid((q, seen)) for q in t.dfa.finals
                           for seen in ((True,) if select else (False, True)))
        live_finals = frozenset(f for f in finals)
        return Nfa(pair, len(order), start, live_finals, frozenset(trans))

    parts = []
    for g in output_alphabet.symbols:
        nfa = run_nfa(lambda q, sym, j, g=g: t.output[(q, sym)][j - 1] == g)
        if shortest_word(nfa) is not None:
            parts.append((nfa, (g,)))
    dom_lift = inverse_lift(nfa_of_dfa(t.dfa), pair, lambda s: s[0])
    l_eps = boolean_op(dom_lift, _union(pair, [p for p, _ in parts]),
                       "difference")
    s = SimpleSum(pair, tuple(parts) + ((l_eps, ()),))
    return MapLex(lam, Leaf(sum_to_transducer(s), output_alphabet))
