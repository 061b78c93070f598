"""Environment interface layer: what an agent can sense and command.

An agent never touches the real environment directly.  It owns an
``Environment`` object that mirrors a snapshot of the real state
(updated by ``refresh``) and forwards commands synchronously through a
registry of named commands (``send_command``).  Concrete environments
subclass ``Environment`` and add their own typed query methods over the
snapshot.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterable


class SensingError(RuntimeError):
    """Raised by refresh() when the real environment cannot be sensed."""


class CommandRejected(Exception):
    """Raised by a command handler to reject a command with a reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class CommandResult:
    """Outcome of one command: success with a payload, or failure with a reason."""

    ok: bool
    payload: Any = None
    reason: str | None = None

    @classmethod
    def success(cls, payload: Any = None) -> "CommandResult":
        return cls(True, payload, None)

    @classmethod
    def failure(cls, reason: str) -> "CommandResult":
        return cls(False, None, reason)


class Environment:
    """Mirror of a real environment plus the set of commands it accepts.

    Contract:
      * ``refresh`` only updates the mirrored snapshot, never the real
        environment.  A failed refresh raises SensingError and leaves the
        previous snapshot in place, with ``stale`` set for guards to read.
      * ``send_command`` is synchronous and returns exactly one
        CommandResult per call.  Unknown commands and handler rejections
        come back as failure results, not exceptions.
    """

    def __init__(self) -> None:
        self._commands: dict[str, Callable[[str, Any], Any]] = {}
        self.stale = False

    def register_command(self, name: str, handler: Callable[[str, Any], Any]) -> None:
        self._commands[name] = handler

    def command_names(self) -> set[str]:
        return set(self._commands)

    def refresh(self) -> None:
        try:
            self._sense()
        except SensingError:
            self.stale = True
            raise
        self.stale = False

    def _sense(self) -> None:
        """Pull a fresh snapshot from the real environment.  Subclass hook."""
        raise NotImplementedError

    def send_command(self, agent_id: str, name: str, args: Any = None) -> CommandResult:
        handler = self._commands.get(name)
        if handler is None:
            return CommandResult.failure(f"unknown command: {name}")
        try:
            return CommandResult.success(handler(agent_id, args))
        except CommandRejected as exc:
            return CommandResult.failure(exc.reason)


class ScriptedEnvironment(Environment):
    """Deterministic test stub backed by an in-process "real" state.

    ``script`` is a queue of external changes; each refresh applies at
    most one queued change to the real state and then re-mirrors it, so a
    run over a scripted environment is exactly replayable.  Entries may
    be None to model a tick with no external activity.
    """

    def __init__(self, initial_state: Any, script: Iterable[Callable[[Any], None] | None] = ()) -> None:
        super().__init__()
        self._real = copy.deepcopy(initial_state)
        self.script: deque = deque(script)
        self.snapshot = copy.deepcopy(self._real)
        self._connected = True

    def _sense(self) -> None:
        if not self._connected:
            raise SensingError("scripted environment disconnected")
        if self.script:
            change = self.script.popleft()
            if change is not None:
                change(self._real)
        self.snapshot = copy.deepcopy(self._real)

    def disconnect(self) -> None:
        self._connected = False

    def reconnect(self) -> None:
        self._connected = True

    def ground_truth(self) -> Any:
        """Direct access to the real state, for oracles only."""
        return self._real
