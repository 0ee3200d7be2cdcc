"""Simple transducers (DFA with length-<=1 outputs on finals) and simple
transductions in sum-of-regular-constants form.

The transducer form reads explicitly marked words |- u -|; the sum form is a
list of pairwise-disjoint regular languages over the unmarked alphabet, each
paired with an output word of length at most one.  Out-of-domain is always
represented as None, never as the empty word: eps is a legal output.
"""

from dataclasses import dataclass, field

from .budget import AlphabetError, MachineError, OverlapError
from .orders import LEFT_MARKER, RIGHT_MARKER, RESERVED, word
from .automata import (Alphabet, Dfa, Nfa, accepts, determinize_minimize,
                       intersection_witness, nfa_of_dfa, run_dfa,
                       shortest_word, _complete)


def guess_arity(symbols):
    symbols = [s for s in symbols if s not in RESERVED]
    if symbols and all(isinstance(s, tuple) for s in symbols):
        lens = {len(s) for s in symbols}
        if len(lens) == 1:
            return lens.pop()
    return 1


def marked_alphabet(content):
    """Content alphabet extended with the two word markers."""
    return Alphabet(content.symbols + (LEFT_MARKER, RIGHT_MARKER), arity=1)


@dataclass(frozen=True)
class SimpleTransducer:
    """DFA over Sigma + markers with an output letter (or eps) per final."""

    dfa: Dfa
    mu: dict = field(compare=False)  # final state -> word of length <= 1

    def __post_init__(self):
        mu = {q: word(v) for q, v in self.mu.items()}
        object.__setattr__(self, "mu", mu)
        if set(mu.keys()) != set(self.dfa.finals):
            raise MachineError("mu must be total on exactly the final states")
        for v in mu.values():
            if len(v) > 1:
                raise MachineError("simple transducer outputs have length <= 1")
        syms = set(self.dfa.alphabet.symbols)
        if LEFT_MARKER not in syms or RIGHT_MARKER not in syms:
            raise MachineError("simple transducer DFA must include markers")

    def __eq__(self, other):
        if not isinstance(other, SimpleTransducer):
            return NotImplemented
        return (self.dfa, self.mu) == (other.dfa, other.mu)

    @property
    def content_alphabet(self):
        syms = tuple(s for s in self.dfa.alphabet.symbols if s not in RESERVED)
        return Alphabet(syms, arity=guess_arity(syms))

    @property
    def level(self):
        return 0


def simple_op_run(t, q, u):
    """Operational semantics: run on |- u -| from q.

    Returns (output word, final state) or None when the run dies or ends in a
    non-final state.
    """
    u = word(u)
    qf = run_dfa(t.dfa, q, (LEFT_MARKER,) + u + (RIGHT_MARKER,))
    if qf is None or qf not in t.dfa.finals:
        return None
    return t.mu[qf], qf


def simple_run(t, u):
    res = simple_op_run(t, t.dfa.initial, u)
    return None if res is None else res[0]


@dataclass(frozen=True)
class SimpleSum:
    """Finite union of regular constant transductions sum L_i |> w_i."""

    alphabet: Alphabet
    parts: tuple  # of (Nfa over alphabet, word of length <= 1)

    def __post_init__(self):
        parts = tuple((nfa, word(w)) for (nfa, w) in self.parts)
        object.__setattr__(self, "parts", parts)
        for (nfa, w) in parts:
            if len(w) > 1:
                raise MachineError("sum outputs have length <= 1")
            if set(nfa.alphabet.symbols) != set(self.alphabet.symbols):
                raise AlphabetError("sum part over a different alphabet")

    def check_disjoint(self):
        for i in range(len(self.parts)):
            for j in range(i + 1, len(self.parts)):
                w = intersection_witness(self.parts[i][0], self.parts[j][0])
                if w is not None:
                    raise OverlapError(
                        f"sum parts {i} and {j} overlap", w)


def sum_eval(s, u):
    """Direct semantics of the sum form; None when u is in no part."""
    u = word(u)
    hit = None
    for i, (nfa, w) in enumerate(s.parts):
        if accepts(nfa, u):
            if hit is not None:
                raise OverlapError(f"sum parts {hit[0]} and {i} overlap", u)
            hit = (i, w)
    return None if hit is None else hit[1]


def sum_to_transducer(s):
    """Compile a disjoint sum into the marked-word transducer form."""
    s.check_disjoint()
    content = s.alphabet
    full = marked_alphabet(content)
    dfas = []
    for (nfa, _w) in s.parts:
        d, _ = _complete(determinize_minimize(nfa))
        dfas.append(d)
    # Product over the content alphabet; state 0 is the pre-marker initial,
    # product states follow, one output state per part at the end.
    from collections import deque
    start = tuple(d.initial for d in dfas)
    index = {start: 1}
    order = [start]
    queue = deque([start])
    prod_delta = {}
    while queue:
        cur = queue.popleft()
        for sym in content.symbols:
            tgt = tuple(d.delta[(q, sym)] for d, q in zip(dfas, cur))
            if tgt not in index:
                index[tgt] = 1 + len(order)
                order.append(tgt)
                queue.append(tgt)
            prod_delta[(index[cur], sym)] = index[tgt]
    n_prod = len(order)
    final_of_part = {i: 1 + n_prod + i for i in range(len(s.parts))}
    delta = dict(prod_delta)
    delta[(0, LEFT_MARKER)] = 1
    for st in order:
        members = [i for i, (d, q) in enumerate(zip(dfas, st))
                   if q in d.finals]
        if len(members) > 1:  # pragma: no cover - excluded by check_disjoint
            raise MachineError("sum parts overlap")
        if members:
            delta[(index[st], RIGHT_MARKER)] = final_of_part[members[0]]
    num = 1 + n_prod + len(s.parts)
    finals = frozenset(final_of_part.values())
    mu = {final_of_part[i]: s.parts[i][1] for i in range(len(s.parts))}
    dfa = Dfa(full, num, 0, finals, delta)
    return SimpleTransducer(dfa, mu)


def transducer_to_sum(t):
    """Inverse presentation: one part per final state with nonempty language,
    in final-state index order."""
    content = t.content_alphabet
    start = t.dfa.delta.get((t.dfa.initial, LEFT_MARKER))
    parts = []
    if start is not None:
        content_trans = frozenset(
            (p, sym, q) for (p, sym), q in t.dfa.delta.items()
            if sym not in RESERVED)
        for f in sorted(t.dfa.finals):
            pre = frozenset(q for (q, sym), r in t.dfa.delta.items()
                            if sym == RIGHT_MARKER and r == f)
            nfa = Nfa(content, t.dfa.num_states, start, pre, content_trans)
            if shortest_word(nfa) is None:
                continue
            parts.append((nfa_of_dfa(determinize_minimize(nfa)), t.mu[f]))
    return SimpleSum(content, tuple(parts))
