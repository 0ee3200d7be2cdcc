"""Ordered alphabets and the rightmost-most-significant lexicographic order.

Words are tuples of symbols.  A symbol is a string or a tuple of symbols
(product alphabets use tuple symbols).  Two names are reserved for the word
markers and one for the map separator; user alphabets may not contain them.
"""

from dataclasses import dataclass, field

from .budget import AlphabetError

LEFT_MARKER = "<|"
RIGHT_MARKER = "|>"
SEPARATOR = "|"
RESERVED = frozenset({LEFT_MARKER, RIGHT_MARKER})

LESS, EQUAL, GREATER = -1, 0, 1


def word(w):
    """Normalize a word given as a string or any iterable of symbols."""
    return tuple(w)


def check_no_reserved(symbols):
    for s in symbols:
        if s in RESERVED:
            raise AlphabetError(f"symbol {s!r} is reserved for word markers")


@dataclass(frozen=True)
class OrderedAlphabet:
    """A finite alphabet with a strict total order, minimal symbol first."""

    symbols: tuple

    _rank: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise AlphabetError("ordered alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise AlphabetError("ordered alphabet symbols must be distinct")
        check_no_reserved(syms)
        object.__setattr__(self, "_rank", {s: i for i, s in enumerate(syms)})

    def __contains__(self, sym):
        return sym in self._rank

    def __len__(self):
        return len(self.symbols)

    def rank(self, sym):
        try:
            return self._rank[sym]
        except KeyError:
            raise AlphabetError(f"symbol {sym!r} not in ordered alphabet")

    @property
    def min_symbol(self):
        return self.symbols[0]

    @property
    def max_symbol(self):
        return self.symbols[-1]

    def succ_symbol(self, sym):
        """Next symbol in the order, or None for the maximal symbol."""
        r = self.rank(sym)
        return self.symbols[r + 1] if r + 1 < len(self.symbols) else None

    def reversed(self):
        return OrderedAlphabet(tuple(reversed(self.symbols)))


@dataclass(frozen=True)
class Convolution:
    """Equal-length words zipped letterwise into a word over a product."""

    tracks: tuple

    def __post_init__(self):
        tracks = tuple(tuple(t) for t in self.tracks)
        object.__setattr__(self, "tracks", tracks)
        if not tracks:
            raise AlphabetError("convolution needs at least one track")
        n = len(tracks[0])
        if any(len(t) != n for t in tracks):
            raise AlphabetError("convolution tracks must have equal length")

    @property
    def length(self):
        return len(self.tracks[0])

    def letters(self):
        """The convolved word: letter i is the tuple of track letters at i."""
        return tuple(zip(*self.tracks)) if self.length else ()


def convolve(*tracks):
    return Convolution(tuple(word(t) for t in tracks)).letters()


def lex_cmp(lam, u, v):
    """Compare equal-length words, most significant letter to the right."""
    u, v = word(u), word(v)
    if len(u) != len(v):
        raise AlphabetError("lex_cmp needs words of equal length")
    for i in range(len(u) - 1, -1, -1):
        ru, rv = lam.rank(u[i]), lam.rank(v[i])
        if ru != rv:
            return LESS if ru < rv else GREATER
    return EQUAL


def lex_succ(lam, u):
    """Immediate successor of u among words of length |u|, None if maximal.

    The leftmost non-maximal letter is bumped and everything to its left
    resets to the minimal symbol (the rightmost letter is most significant).
    """
    u = word(u)
    for i, sym in enumerate(u):
        nxt = lam.succ_symbol(sym)
        if nxt is not None:
            return (lam.min_symbol,) * i + (nxt,) + u[i + 1:]
        lam.rank(sym)  # validate
    return None


def lex_enum(lam, u):
    """Yield the |B|^|u| convolutions u (x) b with b ascending in the order.

    Lazy: successive annotations are produced by the successor function, so
    consumers can stream arbitrarily large enumerations.
    """
    u = word(u)
    b = (lam.min_symbol,) * len(u)
    while b is not None:
        yield Convolution((u, b))
        b = lex_succ(lam, b)


@dataclass(frozen=True)
class KLexOrder:
    """Component-priority order on words over B1 x ... x Bk.

    Track 1 is most significant; ties fall through to later tracks, each
    compared by the rightmost-significant lexicographic extension.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise AlphabetError("k-lex order needs at least one component")

    @property
    def k(self):
        return len(self.components)

    def product_symbols(self):
        """All k-tuples over the component alphabets, in klex letter order."""
        syms = [()]
        for comp in self.components:
            syms = [s + (c,) for s in syms for c in comp.symbols]
        return tuple(syms)


def _klex_tracks(order, u):
    u = word(u)
    k = order.k
    for letter in u:
        if not isinstance(letter, tuple) or len(letter) != k:
            raise AlphabetError(f"letter {letter!r} is not a {k}-tuple")
    return [tuple(letter[j] for letter in u) for j in range(k)]


def klex_cmp(order, u, v):
    u, v = word(u), word(v)
    if len(u) != len(v):
        raise AlphabetError("klex_cmp needs words of equal length")
    ut, vt = _klex_tracks(order, u), _klex_tracks(order, v)
    for j in range(order.k):
        c = lex_cmp(order.components[j], ut[j], vt[j])
        if c != EQUAL:
            return c
    return EQUAL


def klex_succ(order, u):
    """Successor under the k-lex order; the last track is least significant."""
    u = word(u)
    tracks = _klex_tracks(order, u)
    for j in range(order.k - 1, -1, -1):
        nxt = lex_succ(order.components[j], tracks[j])
        if nxt is not None:
            tracks[j] = nxt
            break
        tracks[j] = (order.components[j].min_symbol,) * len(u)
    else:
        return None
    return tuple(zip(*tracks)) if u else ()


def klex_enum(order, n):
    """All words of length n over the product alphabet, ascending."""
    b = tuple((comp.min_symbol,) * n for comp in order.components)
    cur = tuple(zip(*b)) if n else ()
    while cur is not None:
        yield cur
        cur = klex_succ(order, cur) if n else None
