"""Guarded, effectful units of behavior: the leaves of tactic trees.

An action couples a pure guard with an effect.  The guard is a query
over the agent state: it returns a witness value when the action is
applicable and None when it is not.  Executing the action hands that
witness to the effect, which may mutate state (typically by sending
environment commands) and returns an optional proposal for the current
goal to evaluate.

The guard is evaluated at most once per deliberation tick: callers pass
a cache token (the tick number) and both the enabledness check and the
execution reuse the same witness.  This keeps randomized guards
coherent within one tick.
"""

from __future__ import annotations

import logging
from typing import Any, Callable

log = logging.getLogger(__name__)

_UNSET = object()


class ContractViolation(RuntimeError):
    """An internal calling-contract bug, as opposed to a domain failure."""


def _always(state: Any) -> Any:
    return True


class Action:
    """id + guard + effect + cost.

    guard:  state -> witness | None        (logically pure)
    effect: (state, witness) -> proposal | None
    cost:   budget units deducted per execution (default 1)
    """

    def __init__(
        self,
        action_id: str,
        effect: Callable[[Any, Any], Any],
        guard: Callable[[Any], Any] | None = None,
        cost: int = 1,
    ) -> None:
        if cost < 0:
            raise ValueError("action cost must be non-negative")
        self.id = action_id
        self.effect = effect
        self.guard = guard if guard is not None else _always
        self.cost = cost
        self._cache_token: Any = _UNSET
        self._cache_value: Any = None

    def _guard_value(self, state: Any, token: Any) -> Any:
        if token is not None and token == self._cache_token:
            return self._cache_value
        try:
            value = self.guard(state)
        except Exception:
            # a broken guard disables the action; the loop must stay alive
            log.warning("guard of action %r raised; treating as disabled", self.id, exc_info=True)
            value = None
        if token is not None:
            self._cache_token = token
            self._cache_value = value
        return value

    def is_enabled(self, state: Any, token: Any = None) -> bool:
        """True iff the guard yields a witness on this state."""
        return self._guard_value(state, token) is not None

    def execute(self, state: Any, token: Any = None) -> Any:
        """Run the effect on the guard's witness; returns the proposal (or None).

        Calling this on a disabled action is a bug in the caller, not a
        domain failure, and raises ContractViolation.  Exceptions from
        the effect propagate; the runtime absorbs them per tick.
        """
        witness = self._guard_value(state, token)
        if witness is None:
            raise ContractViolation(f"action {self.id!r} executed while disabled")
        return self.effect(state, witness)

    def __repr__(self) -> str:
        return f"Action({self.id!r})"
