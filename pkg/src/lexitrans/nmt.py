"""Nested marble transducers: the k-level machine model, its labeled step
relation, execution with cycle detection, and the run-analysis primitives
(full configurations, last-visited states, right-to-right traversals, and the
per-position encoding) that drive the machine-to-expression conversion.

A level-0 machine is a SimpleTransducer.  A level-k machine reads its input
between markers; it drops a marble on every left move, lifts one on every
right move, and on the left marker calls its level-(k-1) assistant on the
convolution of the marked word with the marble annotation.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

from .budget import MachineError, AlphabetError, ensure_budget
from .orders import LEFT_MARKER, RIGHT_MARKER, word
from .automata import Alphabet
from .simple import SimpleTransducer, simple_op_run

LIFT = "lift"  # sentinel in delta's codomain


class Configuration(NamedTuple):
    state: int
    pos: int
    ann: tuple  # marbles annotating positions pos..n+1 of the marked word


class StepLabel(NamedTuple):
    kind: str       # "drop" | "lift" | "call"
    output: tuple
    inner_final: object = None


@dataclass(frozen=True)
class Nmt:
    input_alphabet: Alphabet
    output_alphabet: Alphabet
    colors: tuple
    c0: object
    num_states: int
    q0: int
    finals: frozenset
    delta: dict = field(compare=False)       # (q, sym, c) -> (color|LIFT, q')
    mu: dict = field(compare=False)          # dom(delta) -> output word
    delta_call: dict = field(compare=False)  # (q, c) -> inner state
    delta_ret: dict = field(compare=False)   # (q, c, inner final) -> q'
    inner: object = None                     # Nmt | SimpleTransducer

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "colors", tuple(self.colors))
        mu = {k: word(v) for k, v in self.mu.items()}
        object.__setattr__(self, "mu", mu)
        if self.c0 not in set(self.colors):
            raise MachineError("initial color not among colors")
        if set(mu.keys()) != set(self.delta.keys()):
            raise MachineError("mu must be defined exactly on dom(delta)")
        colors = set(self.colors)
        syms = set(self.input_alphabet.symbols) | {RIGHT_MARKER}
        for (q, sym, c), (x, q2) in self.delta.items():
            if not (0 <= q < self.num_states and 0 <= q2 < self.num_states):
                raise MachineError("delta uses bad state")
            if sym not in syms:
                raise AlphabetError(f"delta symbol {sym!r} not allowed")
            if c not in colors or (x is not LIFT and x not in colors):
                raise MachineError("delta uses unknown color")

    @property
    def level(self):
        return 1 + self.inner.level

    def marked_word(self, u):
        return (LEFT_MARKER,) + word(u) + (RIGHT_MARKER,)


def machine_level(t):
    return t.level


def spf_maps(num_states, colors, inner_initial, inner_finals):
    """The call/return maps of a state-passing free machine."""
    call = {(q, c): inner_initial
            for q in range(num_states) for c in colors}
    ret = {(q, c, p): q
           for q in range(num_states) for c in colors for p in inner_finals}
    return call, ret


def inner_initial(t):
    return t.inner.q0 if isinstance(t.inner, Nmt) else t.inner.dfa.initial


def inner_finals(t):
    return (t.inner.finals if isinstance(t.inner, Nmt)
            else t.inner.dfa.finals)


def is_structurally_spf(t):
    """delta_call constant to the inner initial; delta_ret the projection
    back to the calling state; recursively down the tower."""
    if isinstance(t, SimpleTransducer):
        return True
    init = inner_initial(t)
    if any(v != init for v in t.delta_call.values()):
        return False
    if any(t.delta_ret[k] != k[0] for k in t.delta_ret):
        return False
    return is_structurally_spf(t.inner)


def is_bottom_producing(t):
    if isinstance(t, SimpleTransducer):
        return True
    return (all(v == () for v in t.mu.values())
            and is_bottom_producing(t.inner))


def check_configuration(t, u, cfg):
    n = len(word(u))
    if not (0 <= cfg.pos <= n + 1):
        raise MachineError(f"position {cfg.pos} out of range")
    if len(cfg.ann) != n + 2 - cfg.pos:
        raise MachineError("annotation length must be n+2-pos")


def call_input(t, u, ann):
    """The convolution (|-u-|) (x) ann the assistant reads."""
    return tuple(zip(t.marked_word(u), ann))


def nmt_step(t, u, cfg, budget=None):
    """One labeled step, or None when no step applies (undefined delta,
    illegal lift, failed call)."""
    budget = ensure_budget(budget)
    u = word(u)
    check_configuration(t, u, cfg)
    q, pos, ann = cfg
    n = len(u)
    if pos == 0:
        c = ann[0]
        qc = t.delta_call.get((q, c))
        if qc is None:
            return None
        conv = call_input(t, u, ann)
        res = run_op(t.inner, qc, conv, budget)
        if res is None:
            return None
        w, p = res
        qr = t.delta_ret.get((q, c, p))
        if qr is None:
            return None
        return Configuration(qr, 1, ann[1:]), StepLabel("call", w, p)
    sym = RIGHT_MARKER if pos == n + 1 else u[pos - 1]
    c = ann[0]
    act = t.delta.get((q, sym, c))
    if act is None:
        return None
    x, q2 = act
    out = t.mu[(q, sym, c)]
    if x is LIFT or x == LIFT:
        if pos > n:  # case 2 requires 1 <= i <= n
            return None
        return Configuration(q2, pos + 1, ann[1:]), StepLabel("lift", out)
    return Configuration(q2, pos - 1, (x,) + ann), StepLabel("drop", out)


def run_op(t, q, u, budget=None):
    """Operational semantics from state q: iterate steps from the initial
    configuration, stopping at the first accepting state.

    Returns (output word, final state) or None (undefined step, failed call,
    or revisited configuration)."""
    budget = ensure_budget(budget)
    if isinstance(t, SimpleTransducer):
        budget.charge()
        return simple_op_run(t, q, u)
    u = word(u)
    cfg = Configuration(q, len(u) + 1, (t.c0,))
    out = []
    visited = set()
    while True:
        if cfg.state in t.finals:
            return tuple(out), cfg.state
        if cfg in visited:
            return None
        visited.add(cfg)
        budget.charge()
        step = nmt_step(t, u, cfg, budget)
        if step is None:
            return None
        cfg, label = step
        out.extend(label.output)


def nmt_run_op(t, q, u, budget=None):
    return run_op(t, q, u, budget)


def nmt_run(t, u, budget=None):
    """The recognized transduction; None means out of domain."""
    if isinstance(t, SimpleTransducer):
        from .simple import simple_run
        return simple_run(t, u)
    res = run_op(t, t.q0, u, budget)
    return None if res is None else res[0]


class TraceLine(NamedTuple):
    depth: int
    config: object       # Configuration, or None for a level-0 summary
    label: StepLabel


def nmt_trace(t, u, depth=0, budget=None):
    """The top-level step sequence, with call steps expanded recursively
    down to the given nesting depth."""
    budget = ensure_budget(budget)
    if isinstance(t, SimpleTransducer):
        res = simple_op_run(t, t.dfa.initial, u)
        out, p = ((), None) if res is None else res
        return [TraceLine(0, None, StepLabel("simple", out, p))]
    if depth > t.level:
        raise MachineError("trace depth exceeds machine level")
    return _trace(t, word(u), t.q0, 0, depth, budget)


def _trace(t, u, q, nesting, depth, budget):
    lines = []
    cfg = Configuration(q, len(u) + 1, (t.c0,))
    visited = set()
    while True:
        if cfg.state in t.finals or cfg in visited:
            return lines
        visited.add(cfg)
        budget.charge()
        step = nmt_step(t, u, cfg, budget)
        if step is None:
            return lines
        nxt, label = step
        lines.append(TraceLine(nesting, cfg, label))
        if label.kind == "call" and depth > 0:
            conv = call_input(t, u, cfg.ann)
            if isinstance(t.inner, SimpleTransducer):
                res = simple_op_run(t.inner, t.inner.dfa.initial, conv)
                out, p = ((), None) if res is None else res
                lines.append(TraceLine(nesting + 1, None,
                                       StepLabel("simple", out, p)))
            else:
                qc = t.delta_call[(cfg.state, cfg.ann[0])]
                lines.extend(_trace(t.inner, conv, qc, nesting + 1,
                                    depth - 1, budget))
        cfg = nxt


def reachable_full_configs(t, u, budget=None):
    """All head-at-left-marker configurations on the run from the initial
    configuration, in visit order (which is the step-chain order)."""
    budget = ensure_budget(budget)
    u = word(u)
    cfg = Configuration(t.q0, len(u) + 1, (t.c0,))
    visited = set()
    full = []
    while True:
        if cfg.pos == 0:
            full.append(cfg)
        if cfg.state in t.finals or cfg in visited:
            return full
        visited.add(cfg)
        budget.charge()
        step = nmt_step(t, u, cfg, budget)
        if step is None:
            return full
        cfg = step[0]


def last_states(t, u, nu, budget=None):
    """For each position, the last state the machine held there before
    reaching the full configuration nu (replayed from the start)."""
    budget = ensure_budget(budget)
    u = word(u)
    cfg = Configuration(t.q0, len(u) + 1, (t.c0,))
    last = {}
    visited = set()
    while True:
        last[cfg.pos] = cfg.state
        if cfg == nu:
            return last
        if cfg.state in t.finals or cfg in visited:
            raise MachineError("unreachable configuration")
        visited.add(cfg)
        budget.charge()
        step = nmt_step(t, u, cfg, budget)
        if step is None:
            raise MachineError("unreachable configuration")
        cfg = step[0]


def rr_traversals(t, u, i, c, alpha=None, budget=None):
    """All state pairs (q1, q2) realizable from position i back to position i
    with the marble c underneath and no visit to the right of i.

    The frozen annotation above i is immaterial for state-passing free
    machines (lifting c exits the region); a canonical all-c0 filler is used
    unless alpha is given."""
    budget = ensure_budget(budget)
    u = word(u)
    n = len(u)
    if not (0 <= i <= n + 1):
        raise MachineError("position out of range")
    if alpha is None:
        alpha = (t.c0,) * (n + 1 - i)
    if len(alpha) != n + 1 - i:
        raise MachineError("alpha must annotate positions i+1..n+1")
    base = (c,) + tuple(alpha)
    pairs = set()
    for q1 in range(t.num_states):
        pairs.add((q1, q1))
        cfg = Configuration(q1, i, base)
        visited = set()
        while True:
            if cfg.state in t.finals or cfg in visited:
                break
            visited.add(cfg)
            budget.charge()
            step = nmt_step(t, u, cfg, budget)
            if step is None:
                break
            cfg = step[0]
            if cfg.pos > i:
                break
            if cfg.pos == i:
                pairs.add((q1, cfg.state))
    return frozenset(pairs)


def phi_encode(t, u, nu, budget=None, rr_cache=None):
    """Per-position triples (marble, last state, right-to-right traversals);
    the C-projection recovers nu's annotation and the length is |u|+2."""
    budget = ensure_budget(budget)
    u = word(u)
    if nu.pos != 0:
        raise MachineError("phi_encode needs a full configuration")
    last = last_states(t, u, nu, budget)
    cache = rr_cache if rr_cache is not None else {}
    letters = []
    for i in range(len(u) + 2):
        ci = nu.ann[i]
        key = (u, i, ci)
        if key not in cache:
            cache[key] = rr_traversals(t, u, i, ci, budget=budget)
        letters.append((ci, last[i], cache[key]))
    return tuple(letters)
