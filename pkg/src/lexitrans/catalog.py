"""The worked-example catalog: the transductions every test suite and the
CLI exercise, each with a documented sample input/output pair.

Level-1 entries annotate with {0,1} (or {0,1,2} for the separator variant);
the two level-2 entries stack two annotation layers.  Underlined letters are
encoded as primed symbols (a -> a').
"""

from dataclasses import dataclass

from .orders import OrderedAlphabet
from .automata import (Alphabet, Dfa, Nfa, SequentialTransducer, complement,
                       product_alphabet)
from .simple import SimpleSum, sum_to_transducer
from .lexexpr import Leaf, MapLex
from .convert import _union, morphism_to_lex

SIGMA = Alphabet(("a", "b", "c", "d"))
SIGMA_AB = Alphabet(("a", "b"))
B2 = OrderedAlphabet(("0", "1"))
B2_REV = OrderedAlphabet(("1", "0"))
B3 = OrderedAlphabet(("0", "1", "2"))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str            # "lex" or "seq"
    value: object        # LexExpr or SequentialTransducer
    note: str
    sample_input: str
    sample_output: str


def _one_mark_nfa(pair, sigma_syms, mark_syms, zero="0"):
    """<Sigma,0>* <mark> <Sigma,0>* for the given set of marked letters."""
    loops = [(q, (s, zero), q) for q in (0, 1) for s in sigma_syms]
    marks = [(0, m, 1) for m in mark_syms]
    return Nfa(pair, 2, 0, frozenset({1}), frozenset(loops + marks))


def _letter_picker_sum(sigma, order):
    """The shared id/rev leaf: output the letter marked 1, eps elsewhere."""
    pair = product_alphabet(sigma, Alphabet(order.symbols))
    parts = []
    for s in sigma.symbols:
        parts.append((_one_mark_nfa(pair, sigma.symbols, [(s, "1")]), (s,)))
    l_eps = complement(_union(pair, [p for p, _ in parts]))
    return SimpleSum(pair, tuple(parts) + ((l_eps, ()),))


def make_id(sigma=SIGMA):
    leaf = Leaf(sum_to_transducer(_letter_picker_sum(sigma, B2)), sigma)
    return MapLex(B2, leaf)


def make_rev(sigma=SIGMA):
    # Same leaf as the identity; only the annotation order flips.
    leaf = Leaf(sum_to_transducer(_letter_picker_sum(sigma, B2_REV)), sigma)
    return MapLex(B2_REV, leaf)


def _pref_letter_nfa(pair, sigma_syms, marked):
    """<Sigma,1>* <s,0> <Sigma,0>* <Sigma,1>*: the leftmost 0 carries s."""
    trans = []
    for s in sigma_syms:
        trans += [(0, (s, "1"), 0), (1, (s, "0"), 1),
                  (1, (s, "1"), 2), (2, (s, "1"), 2)]
    trans += [(0, m, 1) for m in marked]
    return Nfa(pair, 3, 0, frozenset({1, 2}), frozenset(trans))


def make_pref(sigma=SIGMA):
    pair = product_alphabet(sigma, Alphabet(B2.symbols))
    parts = []
    for s in sigma.symbols:
        parts.append((_pref_letter_nfa(pair, sigma.symbols, [(s, "0")]), (s,)))
    l_eps = complement(_union(pair, [p for p, _ in parts]))
    leaf = Leaf(sum_to_transducer(SimpleSum(pair, tuple(parts) + ((l_eps, ()),))),
                sigma)
    return MapLex(B2, leaf)


def make_pref_sharp(sigma=SIGMA):
    """Prefix list with separators.

    Letter-producing annotations are those of pref (over 0/1 only); the
    separator is produced on annotations 2..201..1 containing at least one 2,
    which sit exactly between consecutive prefix blocks in the enumeration.
    """
    pair = product_alphabet(sigma, Alphabet(B3.symbols))
    out = Alphabet(sigma.symbols + ("#",))
    parts = []
    for s in sigma.symbols:
        parts.append((_pref_letter_nfa(pair, sigma.symbols, [(s, "0")]), (s,)))
    # 2+ 0 1*  (annotations with a 2 that are about to roll over)
    trans = []
    for s in sigma.symbols:
        trans += [(0, (s, "2"), 1), (1, (s, "2"), 1), (1, (s, "0"), 2),
                  (2, (s, "1"), 2)]
    sep = Nfa(pair, 3, 0, frozenset({2}), frozenset(trans))
    parts.append((sep, ("#",)))
    l_eps = complement(_union(pair, [p for p, _ in parts]))
    leaf = Leaf(sum_to_transducer(SimpleSum(pair, tuple(parts) + ((l_eps, ()),))),
                out)
    return MapLex(B3, leaf)


def make_sub(sigma=SIGMA):
    """Enumerate all subwords: one annotation layer picks the subword, the
    inner morphism deletes the unmarked letters."""
    pair_syms = tuple((s, b) for s in sigma.symbols for b in B2.symbols)
    pair = Alphabet(pair_syms, arity=2)
    del0 = {(s, b): (s,) if b == "1" else () for (s, b) in pair_syms}
    inner = morphism_to_lex(del0, pair, sigma)
    return MapLex(B2, inner)


def underline(sym):
    return sym + "'"


def make_square(sigma=SIGMA):
    """Each outer annotation fixes the underline position; the inner layer
    replays the word with that position primed."""
    out = Alphabet(sigma.symbols + tuple(underline(s) for s in sigma.symbols))
    pair1 = product_alphabet(sigma, Alphabet(B2.symbols))
    pair2 = product_alphabet(pair1, Alphabet(B2.symbols))

    def loops(states, cond):
        return [(q, ((s, x), y), q) for q in states
                for s in sigma.symbols for (x, y) in cond]

    parts = []
    zz = [("0", "0")]
    for s in sigma.symbols:
        # both marks on the same position, letter s: output the primed copy
        same = Nfa(pair2, 2, 0, frozenset({1}),
                   frozenset(loops([0, 1], zz) + [(0, ((s, "1"), "1"), 1)]))
        parts.append((same, (underline(s),)))
        # marks on distinct positions; the inner (second) mark reads s
        trans = loops([0, "A", "B", "C", "D"], zz)
        for t in sigma.symbols:
            trans.append((0, ((t, "1"), "0"), "A"))
        trans.append(("A", ((s, "0"), "1"), "B"))
        trans.append((0, ((s, "0"), "1"), "C"))
        for t in sigma.symbols:
            trans.append(("C", ((t, "1"), "0"), "D"))
        idx = {0: 0, "A": 1, "B": 2, "C": 3, "D": 4}
        diff = Nfa(pair2, 5, 0, frozenset({2, 4}),
                   frozenset((idx[p], sym, idx[q]) for (p, sym, q) in trans))
        parts.append((diff, (s,)))
    l_eps = complement(_union(pair2, [p for p, _ in parts]))
    leaf = Leaf(sum_to_transducer(SimpleSum(pair2, tuple(parts) + ((l_eps, ()),))),
                out)
    return MapLex(B2, MapLex(B2, leaf))


def make_doubling(sigma=SIGMA_AB):
    delta = {(0, s): 0 for s in sigma.symbols}
    out = {(0, s): (s, s) for s in sigma.symbols}
    return SequentialTransducer(Dfa(sigma, 1, 0, frozenset({0}), delta), out)


def make_erase_b(sigma=SIGMA_AB):
    delta = {(0, s): 0 for s in sigma.symbols}
    out = {(0, "a"): ("a",), (0, "b"): ()}
    return SequentialTransducer(Dfa(sigma, 1, 0, frozenset({0}), delta), out)


def make_phi_a():
    return morphism_to_lex({"a": ("a",), "b": ()}, SIGMA_AB, Alphabet(("a",)))


def catalog():
    """All worked examples, keyed by name."""
    entries = [
        CatalogEntry("id", "lex", make_id(),
                     "copies the input unchanged", "abc", "abc"),
        CatalogEntry("rev", "lex", make_rev(),
                     "reverses the input", "abc", "cba"),
        CatalogEntry("morphism", "lex", make_phi_a(),
                     "keeps a's, deletes b's", "ab", "a"),
        CatalogEntry("pref", "lex", make_pref(),
                     "lists all prefixes, longest first", "abcd",
                     "abcdabcaba"),
        CatalogEntry("pref_sharp", "lex", make_pref_sharp(),
                     "prefix list with # separators", "abc", "abc#ab#a"),
        CatalogEntry("sub", "lex", make_sub(),
                     "enumerates all subwords", "abc", "ababcacbcabc"),
        CatalogEntry("square", "lex", make_square(),
                     "replays the word once per position, priming it", "abc",
                     "a'bcab'cabc'"),
        CatalogEntry("seq-doubling", "seq", make_doubling(),
                     "doubles every letter", "aa", "aaaa"),
        CatalogEntry("erase-b", "seq", make_erase_b(),
                     "erases every b", "aba", "aa"),
    ]
    return {e.name: e for e in entries}
