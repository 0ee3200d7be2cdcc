"""Finite automata over arbitrary finite alphabets, and the constructions
(determinization, minimization, boolean operations, projection,
co-determinization, bounded equivalence) the rest of the toolkit consumes.

States are dense integer indices.  Every construction renumbers its output
deterministically (BFS discovery order, symbols iterated in declared alphabet
order) so results are reproducible bit for bit.
"""

from collections import deque
from dataclasses import dataclass, field

from .budget import AlphabetError, MachineError, StateCapExceeded, DEFAULT_STATE_CAP
from .orders import word


def symkey(sym):
    """Total order on symbols (strings, ints, nested tuples) for sorting."""
    if isinstance(sym, tuple):
        return (2, tuple(symkey(x) for x in sym))
    if isinstance(sym, str):
        return (1, sym)
    return (0, sym)


@dataclass(frozen=True)
class Alphabet:
    """Finite symbol set; arity > 1 marks a convolution/product alphabet."""

    symbols: tuple
    arity: int = 1

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(set(syms)) != len(syms):
            raise AlphabetError("alphabet symbols must be pairwise distinct")
        if self.arity < 1:
            raise AlphabetError("arity must be >= 1")
        if self.arity > 1:
            for s in syms:
                if not isinstance(s, tuple) or len(s) != self.arity:
                    raise AlphabetError(
                        f"symbol {s!r} is not a {self.arity}-tuple")

    def __contains__(self, sym):
        return sym in set(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, sym):
        return self.symbols.index(sym)


def product_alphabet(*alphabets):
    """Flat product alphabet; symbols are tuples, tracks in argument order."""
    syms = [()]
    for a in alphabets:
        syms = [s + (x,) for s in syms for x in a.symbols]
    return Alphabet(tuple(syms), arity=len(alphabets))


@dataclass(frozen=True)
class Nfa:
    alphabet: Alphabet
    num_states: int
    initial: int
    finals: frozenset
    transitions: frozenset  # of (state, symbol, state)

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        states = range(self.num_states)
        if self.initial not in states:
            raise MachineError("initial state out of range")
        if any(q not in states for q in self.finals):
            raise MachineError("final state out of range")
        symbols = set(self.alphabet.symbols)
        for (p, s, q) in self.transitions:
            if p not in states or q not in states:
                raise MachineError(f"transition {(p, s, q)} uses bad state")
            if s not in symbols:
                raise AlphabetError(f"transition symbol {s!r} not in alphabet")

    def step_map(self):
        m = {}
        for (p, s, q) in self.transitions:
            m.setdefault((p, s), set()).add(q)
        return m


@dataclass(frozen=True)
class Dfa:
    alphabet: Alphabet
    num_states: int
    initial: int
    finals: frozenset
    delta: dict = field(compare=False)  # (state, symbol) -> state, partial

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "delta", dict(self.delta))
        seen = set()
        for (p, s), q in self.delta.items():
            if not (0 <= p < self.num_states and 0 <= q < self.num_states):
                raise MachineError("delta uses bad state")
            if (p, s) in seen:
                raise MachineError("delta not a function")
            seen.add((p, s))

    def __eq__(self, other):
        if not isinstance(other, Dfa):
            return NotImplemented
        return (self.alphabet, self.num_states, self.initial, self.finals,
                self.delta) == (other.alphabet, other.num_states,
                                other.initial, other.finals, other.delta)


@dataclass(frozen=True)
class CoDetNfa:
    """Backward-deterministic automaton: single final state, and for every
    (state, symbol) at most one incoming transition.

    Languages containing mismatched boundary words (e.g. {eps, a}) need
    several initial states, so initials is a set; `to_nfa` converts back at
    the cost of the structural property.
    """

    alphabet: Alphabet
    num_states: int
    initials: frozenset
    final: int
    transitions: frozenset

    def __post_init__(self):
        object.__setattr__(self, "initials", frozenset(self.initials))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        seen = {}
        for (p, s, q) in self.transitions:
            if (q, s) in seen:
                raise MachineError("not backward deterministic")
            seen[(q, s)] = p

    def co_delta(self):
        """(state, symbol) -> the unique predecessor, partial."""
        return {(q, s): p for (p, s, q) in self.transitions}

    def accepts(self, w):
        co = self.co_delta()
        s = self.final
        for sym in reversed(word(w)):
            s = co.get((s, sym))
            if s is None:
                return False
        return s in self.initials

    def to_nfa(self):
        """Plain Nfa with a fresh initial state; loses co-determinism."""
        fresh = self.num_states
        trans = set(self.transitions)
        for (p, s, q) in self.transitions:
            if p in self.initials:
                trans.add((fresh, s, q))
        finals = {self.final}
        if self.final in self.initials:
            finals.add(fresh)
        return Nfa(self.alphabet, self.num_states + 1, fresh,
                   frozenset(finals), frozenset(trans))


def is_backward_deterministic(a):
    seen = set()
    for (p, s, q) in a.transitions:
        if (q, s) in seen:
            return False
        seen.add((q, s))
    return True


def nfa_of_dfa(d):
    trans = frozenset((p, s, q) for (p, s), q in d.delta.items())
    return Nfa(d.alphabet, d.num_states, d.initial, d.finals, trans)


def accepts(a, w):
    """Membership for Nfa or Dfa; raises on symbols outside the alphabet."""
    w = word(w)
    symbols = set(a.alphabet.symbols)
    for sym in w:
        if sym not in symbols:
            raise AlphabetError(f"symbol {sym!r} not in alphabet")
    if isinstance(a, Dfa):
        q = a.initial
        for sym in w:
            q = a.delta.get((q, sym))
            if q is None:
                return False
        return q in a.finals
    cur = {a.initial}
    step = a.step_map()
    for sym in w:
        cur = set().union(*(step.get((p, sym), set()) for p in cur))
        if not cur:
            return False
    return bool(cur & a.finals)


def run_dfa(d, state, w):
    """Run a Dfa from a given state; None if the run dies."""
    q = state
    for sym in word(w):
        q = d.delta.get((q, sym))
        if q is None:
            return None
    return q


def determinize(a, cap=DEFAULT_STATE_CAP):
    """Subset construction; keeps only reachable, nonempty subsets."""
    step = a.step_map()
    start = frozenset({a.initial})
    index = {start: 0}
    order = [start]
    delta = {}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for sym in a.alphabet.symbols:
            tgt = frozenset().union(*(step.get((p, sym), set()) for p in cur))
            if not tgt:
                continue
            if tgt not in index:
                if len(index) >= cap:
                    raise StateCapExceeded("determinization exceeded cap")
                index[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
            delta[(index[cur], sym)] = index[tgt]
    finals = frozenset(i for s, i in index.items() if s & a.finals)
    return Dfa(a.alphabet, len(order), 0, finals, delta)


def _complete(d):
    """Total version of a Dfa; returns (dfa, sink) with sink possibly unused."""
    sink = d.num_states
    delta = dict(d.delta)
    used = False
    for p in range(d.num_states):
        for sym in d.alphabet.symbols:
            if (p, sym) not in delta:
                delta[(p, sym)] = sink
                used = True
    if used:
        for sym in d.alphabet.symbols:
            delta[(sink, sym)] = sink
        return Dfa(d.alphabet, d.num_states + 1, d.initial, d.finals, delta), sink
    return d, None


def _trim_renumber(d):
    """Drop states unreachable forward or backward; renumber in BFS order."""
    fwd = {d.initial}
    queue = deque([d.initial])
    while queue:
        p = queue.popleft()
        for sym in d.alphabet.symbols:
            q = d.delta.get((p, sym))
            if q is not None and q not in fwd:
                fwd.add(q)
                queue.append(q)
    pred = {}
    for (p, sym), q in d.delta.items():
        pred.setdefault(q, set()).add(p)
    bwd = set(d.finals)
    queue = deque(d.finals)
    while queue:
        q = queue.popleft()
        for p in pred.get(q, ()):
            if p not in bwd:
                bwd.add(p)
                queue.append(p)
    live = fwd & bwd
    if d.initial not in live:
        return Dfa(d.alphabet, 1, 0, frozenset(), {})
    index = {d.initial: 0}
    order = [d.initial]
    queue = deque([d.initial])
    while queue:
        p = queue.popleft()
        for sym in d.alphabet.symbols:
            q = d.delta.get((p, sym))
            if q in live and q not in index:
                index[q] = len(order)
                order.append(q)
                queue.append(q)
    delta = {(index[p], sym): index[q]
             for (p, sym), q in d.delta.items()
             if p in index and q in index}
    finals = frozenset(index[q] for q in d.finals if q in index)
    return Dfa(d.alphabet, len(order), 0, finals, delta)


def minimize_dfa(d):
    """Moore partition refinement, then dead-state trimming."""
    total, _sink = _complete(d)
    block = {q: (q in total.finals) for q in range(total.num_states)}
    while True:
        sig = {}
        for q in range(total.num_states):
            sig[q] = (block[q],) + tuple(
                block[total.delta[(q, sym)]] for sym in total.alphabet.symbols)
        new_ids = {}
        new_block = {}
        for q in range(total.num_states):
            new_block[q] = new_ids.setdefault(sig[q], len(new_ids))
        if len(new_ids) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    reps = {}
    delta = {}
    for q in range(total.num_states):
        reps.setdefault(block[q], q)
    for b, q in reps.items():
        for sym in total.alphabet.symbols:
            delta[(b, sym)] = block[total.delta[(q, sym)]]
    finals = frozenset(block[q] for q in total.finals)
    merged = Dfa(total.alphabet, len(reps), block[total.initial], finals, delta)
    return _trim_renumber(merged)


def determinize_minimize(a, cap=DEFAULT_STATE_CAP):
    """Minimal Dfa for L(a), complete up to dead-state trimming."""
    if isinstance(a, Dfa):
        return minimize_dfa(a)
    return minimize_dfa(determinize(a, cap=cap))


def boolean_op(a, b, op):
    """Product construction for intersect / union / difference."""
    if op not in ("intersect", "union", "difference"):
        raise MachineError(f"unknown boolean op {op!r}")
    if set(a.alphabet.symbols) != set(b.alphabet.symbols):
        raise AlphabetError("boolean_op needs identical alphabets")
    da, _ = _complete(determinize_minimize(a))
    db, _ = _complete(determinize_minimize(b))
    alphabet = a.alphabet
    index = {(da.initial, db.initial): 0}
    order = [(da.initial, db.initial)]
    queue = deque(order)
    delta = {}
    while queue:
        (p, q) = queue.popleft()
        for sym in alphabet.symbols:
            tgt = (da.delta[(p, sym)], db.delta[(q, sym)])
            if tgt not in index:
                index[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
            delta[(index[(p, q)], sym)] = index[tgt]
    if op == "intersect":
        ok = lambda p, q: p in da.finals and q in db.finals
    elif op == "union":
        ok = lambda p, q: p in da.finals or q in db.finals
    else:
        ok = lambda p, q: p in da.finals and q not in db.finals
    finals = frozenset(index[(p, q)] for (p, q) in order if ok(p, q))
    prod = Dfa(alphabet, len(order), 0, finals, delta)
    return nfa_of_dfa(minimize_dfa(prod))


def complement(a):
    d, _ = _complete(determinize_minimize(a))
    flipped = Dfa(d.alphabet, d.num_states, d.initial,
                  frozenset(range(d.num_states)) - d.finals, d.delta)
    return nfa_of_dfa(minimize_dfa(flipped))


def universal_nfa(alphabet):
    trans = frozenset((0, s, 0) for s in alphabet.symbols)
    return Nfa(alphabet, 1, 0, frozenset({0}), trans)


def empty_nfa(alphabet):
    return Nfa(alphabet, 1, 0, frozenset(), frozenset())


def project(a, track):
    """Image of L(a) under projection of a product alphabet onto one track."""
    if a.alphabet.arity < 2:
        raise AlphabetError("project needs a product alphabet (arity >= 2)")
    if not (0 <= track < a.alphabet.arity):
        raise AlphabetError(f"bad track {track}")
    seen = []
    for s in a.alphabet.symbols:
        if s[track] not in seen:
            seen.append(s[track])
    arity = 1
    if seen and all(isinstance(x, tuple) for x in seen):
        lens = {len(x) for x in seen}
        if len(lens) == 1:
            arity = lens.pop()
    alphabet = Alphabet(tuple(seen), arity=arity)
    trans = frozenset((p, s[track], q) for (p, s, q) in a.transitions)
    return Nfa(alphabet, a.num_states, a.initial, a.finals, trans)


def map_letters(a, fn, new_alphabet):
    """Image of L(a) under a letter-to-letter renaming fn."""
    trans = frozenset((p, fn(s), q) for (p, s, q) in a.transitions)
    return Nfa(new_alphabet, a.num_states, a.initial, a.finals, trans)


def inverse_lift(a, big_alphabet, proj):
    """Preimage {w over big_alphabet : proj*(w) in L(a)} with proj letterwise."""
    trans = set()
    for x in big_alphabet.symbols:
        y = proj(x)
        for (p, s, q) in a.transitions:
            if s == y:
                trans.add((p, x, q))
    return Nfa(big_alphabet, a.num_states, a.initial, a.finals,
               frozenset(trans))


def codeterminize(a, cap=DEFAULT_STATE_CAP):
    """Backward-deterministic automaton for L(a).

    Reverse subset construction: determinize the reversed language starting
    from the final-state set; reading the result's transitions backwards is
    deterministic by construction, with the start subset as the single final.
    """
    back = {}
    for (p, s, q) in a.transitions:
        back.setdefault((q, s), set()).add(p)
    start = frozenset(a.finals)
    index = {start: 0}
    order = [start]
    queue = deque([start])
    rev_delta = {}
    while queue:
        cur = queue.popleft()
        for sym in a.alphabet.symbols:
            tgt = frozenset().union(*(back.get((q, sym), set()) for q in cur))
            if not tgt:
                continue
            if tgt not in index:
                if len(index) >= cap:
                    raise StateCapExceeded("codeterminize exceeded cap")
                index[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
            rev_delta[(index[cur], sym)] = index[tgt]
    # rev_delta reads the word right to left; flip it to forward transitions.
    trans = frozenset((q, sym, p) for (p, sym), q in rev_delta.items())
    initials = frozenset(i for s, i in index.items() if a.initial in s)
    return CoDetNfa(a.alphabet, len(order), initials, 0, trans)


def shortest_word(a):
    """A shortest accepted word of an Nfa, or None if the language is empty."""
    if a.initial in a.finals:
        return ()
    step = a.step_map()
    parent = {a.initial: None}
    queue = deque([a.initial])
    while queue:
        p = queue.popleft()
        for sym in a.alphabet.symbols:
            for q in step.get((p, sym), ()):
                if q in parent:
                    continue
                parent[q] = (p, sym)
                if q in a.finals:
                    out = []
                    cur = q
                    while parent[cur] is not None:
                        cur, s = parent[cur]
                        out.append(s)
                    return tuple(reversed(out))
                queue.append(q)
    return None


def intersection_witness(a, b):
    """A shortest word in L(a) & L(b), or None if the intersection is empty."""
    if set(a.alphabet.symbols) != set(b.alphabet.symbols):
        raise AlphabetError("intersection_witness needs identical alphabets")
    sa, sb = a.step_map(), b.step_map()
    start = (a.initial, b.initial)
    parent = {start: None}
    queue = deque([start])

    def ok(pq):
        return pq[0] in a.finals and pq[1] in b.finals

    if ok(start):
        return ()
    while queue:
        (p, q) = queue.popleft()
        for sym in a.alphabet.symbols:
            for p2 in sa.get((p, sym), ()):
                for q2 in sb.get((q, sym), ()):
                    nxt = (p2, q2)
                    if nxt in parent:
                        continue
                    parent[nxt] = ((p, q), sym)
                    if ok(nxt):
                        out = []
                        cur = nxt
                        while parent[cur] is not None:
                            cur, s = parent[cur]
                            out.append(s)
                        return tuple(reversed(out))
                    queue.append(nxt)
    return None


def equiv(a, b):
    """True if L(a) == L(b), else a shortest word in the symmetric difference."""
    if set(a.alphabet.symbols) != set(b.alphabet.symbols):
        raise AlphabetError("equiv needs identical alphabets")
    da, _ = _complete(determinize_minimize(a))
    db, _ = _complete(determinize_minimize(b))
    start = (da.initial, db.initial)
    parent = {start: None}
    queue = deque([start])

    def differs(pq):
        return (pq[0] in da.finals) != (pq[1] in db.finals)

    def build(pq):
        out = []
        while parent[pq] is not None:
            pq, s = parent[pq]
            out.append(s)
        return tuple(reversed(out))

    if differs(start):
        return build(start)
    while queue:
        (p, q) = queue.popleft()
        for sym in a.alphabet.symbols:
            nxt = (da.delta[(p, sym)], db.delta[(q, sym)])
            if nxt in parent:
                continue
            parent[nxt] = ((p, q), sym)
            if differs(nxt):
                return build(nxt)
            queue.append(nxt)
    return True


@dataclass(frozen=True)
class SequentialTransducer:
    """Deterministic one-way transducer: a Dfa plus per-transition outputs.

    The output map must be total on dom(delta); the recognized function has
    domain L(dfa).
    """

    dfa: Dfa
    output: dict = field(compare=False)

    def __post_init__(self):
        out = {k: word(v) for k, v in self.output.items()}
        object.__setattr__(self, "output", out)
        if set(out.keys()) != set(self.dfa.delta.keys()):
            raise MachineError("output map must cover exactly dom(delta)")

    def __eq__(self, other):
        if not isinstance(other, SequentialTransducer):
            return NotImplemented
        return (self.dfa, self.output) == (other.dfa, other.output)


def seq_step_run(t, state, w):
    """Run from a state, collecting outputs; None if delta dies.  Finality is
    the caller's concern."""
    q = state
    out = []
    for sym in word(w):
        nxt = t.dfa.delta.get((q, sym))
        if nxt is None:
            return None
        out.extend(t.output[(q, sym)])
        q = nxt
    return tuple(out), q


def seq_run(t, w):
    """The transduction of a sequential transducer; None when w not in L(dfa)."""
    res = seq_step_run(t, t.dfa.initial, w)
    if res is None:
        return None
    out, q = res
    return out if q in t.dfa.finals else None
