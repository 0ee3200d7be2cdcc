"""Lexicographic transductions, nested marble transducers, and automatic
transductions over finite words, with constructive conversions between the
three presentations and bounded-oracle verification utilities."""

from .budget import (Budget, BudgetExceeded, LexitransError, MachineError,
                     OverlapError, StateCapExceeded, AlphabetError)
from .orders import (LEFT_MARKER, RIGHT_MARKER, SEPARATOR, Convolution,
                     KLexOrder, OrderedAlphabet, convolve, klex_cmp,
                     klex_enum, klex_succ, lex_cmp, lex_enum, lex_succ, word)
from .automata import (Alphabet, CoDetNfa, Dfa, Nfa, SequentialTransducer,
                       accepts, boolean_op, codeterminize, complement,
                       determinize_minimize, equiv, product_alphabet,
                       project, seq_run)
from .simple import (SimpleSum, SimpleTransducer, simple_op_run, simple_run,
                     sum_eval, sum_to_transducer, transducer_to_sum)
from .lexexpr import (Leaf, MapLex, lex_domain, lex_eval, lex_level,
                      lex_restrict)
from .catalog import CatalogEntry, catalog

__all__ = [n for n in dir() if not n.startswith("_")]
