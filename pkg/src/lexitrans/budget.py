"""Step budgets and the error types shared across the toolkit.

Every potentially exponential computation (lexicographic evaluation, machine
runs, automata constructions) charges against a budget so that blow-ups fail
loudly instead of hanging.
"""

import os

DEFAULT_STEPS = 10_000_000
DEFAULT_STATE_CAP = 1_000_000

ENV_VAR = "LEXITRANS_BUDGET"


class LexitransError(Exception):
    """Base class for all toolkit errors."""


class BudgetExceeded(LexitransError):
    """A computation exceeded its step budget."""


class StateCapExceeded(LexitransError):
    """A construction exceeded its state-count cap."""


class AlphabetError(LexitransError):
    """Symbol/alphabet mismatch (bad symbol, arity, reserved name, ...)."""


class MachineError(LexitransError):
    """Structurally invalid machine or ill-formed input to a construction."""


class OverlapError(MachineError):
    """Languages required to be disjoint overlap.  Carries a witness word."""

    def __init__(self, message, witness):
        super().__init__(f"{message} (witness: {witness!r})")
        self.witness = witness


def default_steps():
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return DEFAULT_STEPS
    try:
        return int(raw)
    except ValueError:
        raise LexitransError(f"bad {ENV_VAR} value: {raw!r}")


class Budget:
    """A mutable step counter shared across a computation."""

    def __init__(self, steps=None):
        self.remaining = default_steps() if steps is None else steps

    def charge(self, n=1):
        self.remaining -= n
        if self.remaining < 0:
            raise BudgetExceeded("step budget exceeded")


def ensure_budget(budget):
    """Pass through an existing Budget, or make a fresh default one."""
    return budget if budget is not None else Budget()
