"""The agent itself: deliberation loop, tracing, and multi-agent messaging.

An agent is state (holding an environment handle and a message inbox),
a goal structure, and a budget.  Execution proceeds in discrete ticks;
each tick performs one sense-reason-act iteration:

  1. budget check: a current goal with no budget left is marked failed
     and the next goal is adopted;
  2. sensing: refresh the environment snapshot;
  3. selection: collect first(cursor, state), the guard-enabled actions
     in scope of the current sub-tactic;
  4. act: choose one candidate (uniformly by default, via the agent's
     seeded rng), execute it, and deduct its cost from the current goal
     and every current ancestor;
  5. resolution: a non-null proposal accepted by the goal's predicate
     solves the goal and the next one is adopted with fresh budget;
     otherwise the cursor advances to next(action).

If no candidate is enabled the agent sleeps that tick and retries the
same cursor next tick.  At most one action executes per tick.

Agents registered on a communication node can message each other by
singlecast, broadcast, or role-based multicast.  Sends are asynchronous
appends to the addressees' inboxes; a sleeping agent with a nonempty
inbox wakes on its next scheduled tick (visible in the trace).  Reading
the inbox is left to the agent's own guards and effects.

Scheduling is in-process and deterministic: a round-robin harness
advances agents one tick each, in registration order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .action import Action, ContractViolation
from .budget import UNLIMITED, BudgetLedger, format_units
from .environment import Environment, SensingError
from .goal import (
    TERMINAL,
    Goal,
    GoalStatus,
    GoalStructure,
    add_after,
    add_before,
    mark_failed,
    mark_solved,
    obtain_current_goal,
)
from .tactic import Tactic


class AgentState:
    """The agent's belief store: an environment handle plus a message inbox.

    Concrete agents subclass this (or just set attributes on it) to hold
    whatever beliefs their guards and effects need.  ``sense`` is called
    once per tick before action selection; the default refreshes the
    environment snapshot.
    """

    def __init__(self, env: Environment | None = None) -> None:
        self.env = env
        self.inbox: list[Message] = []
        self.agent: "Agent | None" = None

    def sense(self) -> None:
        if self.env is not None:
            self.env.refresh()

    def take_message(self) -> "Message | None":
        """Pop the oldest inbox message, if any (for use inside effects)."""
        if self.inbox:
            return self.inbox.pop(0)
        return None


# -- messaging --------------------------------------------------------------------


@dataclass(frozen=True)
class Address:
    """Message addressing: one agent, everyone, or everyone with a role."""

    kind: str  # "single" | "broadcast" | "role"
    value: str | None = None

    @classmethod
    def to(cls, agent_id: str) -> "Address":
        return cls("single", agent_id)

    @classmethod
    def broadcast(cls) -> "Address":
        return cls("broadcast")

    @classmethod
    def role(cls, role: str) -> "Address":
        return cls("role", role)


@dataclass(frozen=True)
class Message:
    sender: str
    address: Address
    payload: Any
    timestamp: int


@dataclass(frozen=True)
class SendReport:
    delivered: tuple[str, ...]
    errors: tuple[str, ...] = ()


class ComNode:
    """In-process registry routing messages between registered agents.

    Delivery is an append to each addressee's inbox: no loss, no
    duplication, FIFO per sender-receiver pair.  Broadcast and role
    multicast exclude the sender.  A singlecast to an unknown id is
    reported back to the sender as a delivery error, not an exception.
    """

    def __init__(self) -> None:
        self._registry: dict[str, tuple[Agent, str]] = {}
        self.clock = 0
        self.sends: list[tuple[Message, tuple[str, ...]]] = []

    def register(self, agent: "Agent", role: str = "") -> None:
        if agent.id in self._registry:
            raise ValueError(f"agent id {agent.id!r} already registered")
        self._registry[agent.id] = (agent, role or agent.role)
        agent.com = self

    def agents(self) -> list["Agent"]:
        return [agent for agent, _ in self._registry.values()]

    @property
    def delivered_total(self) -> int:
        return sum(len(ids) for _, ids in self.sends)

    def send(self, message: Message) -> SendReport:
        if message.sender not in self._registry:
            raise ContractViolation(f"sender {message.sender!r} is not registered")
        address = message.address
        errors: list[str] = []
        if address.kind == "single":
            entry = self._registry.get(address.value)
            targets = [entry[0]] if entry is not None else []
            if entry is None:
                errors.append(f"unknown agent: {address.value}")
        elif address.kind == "broadcast":
            targets = [a for a, _ in self._registry.values() if a.id != message.sender]
        elif address.kind == "role":
            targets = [a for a, r in self._registry.values()
                       if r == address.value and a.id != message.sender]
        else:
            raise ValueError(f"unknown address kind: {address.kind}")
        for agent in targets:
            agent.state.inbox.append(message)
        delivered = tuple(a.id for a in targets)
        self.sends.append((message, delivered))
        return SendReport(delivered, tuple(errors))


# -- reports and tracing -------------------------------------------------------------


def _summarize(proposal: Any) -> str:
    if proposal is None:
        return "-"
    if proposal is True:
        return "true"
    if proposal is False:
        return "false"
    text = "".join(str(proposal).split())
    return text[:60] if text else "-"


@dataclass
class TickReport:
    """What one deliberation tick did, renderable as one trace line."""

    tick: int
    agent_id: str
    goal_name: str = "-"
    cursor_path: str = "-"
    action_id: str | None = None
    slept: bool = False
    proposal: Any = None
    events: tuple[str, ...] = ()
    budget_goal: float = UNLIMITED
    budget_root: float = UNLIMITED
    error: str | None = None

    def trace_line(self) -> str:
        action = self.action_id if self.action_id is not None else ("SLEPT" if self.slept else "-")
        events = ",".join(self.events) if self.events else "-"
        return (
            f"tick={self.tick} agent={self.agent_id} goal={self.goal_name} "
            f"cursor={self.cursor_path} action={action} proposal={_summarize(self.proposal)} "
            f"budget_goal={format_units(self.budget_goal)} "
            f"budget_root={format_units(self.budget_root)} events={events}"
        )


@dataclass
class RunReport:
    """Aggregate of a single-agent run: final status plus all tick reports."""

    status: str  # SOLVED | FAILED | TIMEOUT | NO_GOAL
    reports: list[TickReport] = field(default_factory=list)
    consumed: float = 0

    @property
    def ticks_used(self) -> int:
        return len(self.reports)

    def trace_lines(self) -> list[str]:
        return [r.trace_line() for r in self.reports]


def choose(candidates: Sequence[Action], rng: random.Random) -> Action:
    """Default selection policy: uniform over the candidate actions.

    A singleton candidate set is returned as-is without consuming a
    random draw, so it is seed-independent.
    """
    if not candidates:
        raise ContractViolation("choose() called with no candidates; caller must sleep")
    if len(candidates) == 1:
        return candidates[0]
    return candidates[rng.randrange(len(candidates))]


# -- the agent --------------------------------------------------------------------


class Agent:
    """A deliberating agent: state, goal structure, budget, seeded rng."""

    def __init__(
        self,
        agent_id: str,
        state: AgentState | None = None,
        goal_structure: GoalStructure | None = None,
        budget: float = UNLIMITED,
        seed: int = 0,
        role: str = "",
        selection_policy: Callable[[Sequence[Action], random.Random], Action] | None = None,
        observer: Callable[[str, Any], None] | None = None,
    ) -> None:
        self.id = agent_id
        self.role = role
        self.state = state if state is not None else AgentState()
        self.state.agent = self
        self.rng = random.Random(seed)
        self.ledger = BudgetLedger(budget)
        self.selection_policy = selection_policy or choose
        self.observer = observer
        self.com: ComNode | None = None
        self.root: GoalStructure | None = None
        self.current_goal: Goal | None = None
        self.cursor: Tactic | None = None
        self.asleep = False
        self._ticks = 0
        self._readopt_pending = False
        if goal_structure is not None:
            self.set_goal(goal_structure)

    # -- wiring ------------------------------------------------------------------

    def set_goal(self, root: GoalStructure) -> None:
        self.root = root
        self.current_goal = None
        self.cursor = None

    def send(self, address: Address, payload: Any) -> SendReport:
        if self.com is None:
            raise ContractViolation(f"agent {self.id!r} is not registered on a communication node")
        message = Message(self.id, address, payload, self.com.clock)
        return self.com.send(message)

    def add_after(self, structure: GoalStructure) -> None:
        """Insert a follow-up goal structure right after the current goal."""
        if self.current_goal is None:
            raise ContractViolation("add_after requires a current goal")
        self.root = add_after(self.current_goal, structure)
        self._allocate_path(self.current_goal)

    def add_before(self, structure: GoalStructure, bmax: float = UNLIMITED) -> None:
        """Wrap the current goal so ``structure`` is established first.

        The current goal is re-selected at the end of the tick, so the
        inserted structure's first goal becomes current.
        """
        if self.current_goal is None:
            raise ContractViolation("add_before requires a current goal")
        self.root = add_before(self.current_goal, structure, bmax=bmax)
        self._readopt_pending = True

    def _emit(self, event: str, payload: Any = None) -> None:
        if self.observer is not None:
            self.observer(event, payload)

    # -- goal adoption -----------------------------------------------------------

    def _allocate_path(self, goal: Goal) -> None:
        for node in goal.node.path_from_root():
            if node.status is GoalStatus.UNSTARTED:
                node.status = GoalStatus.INPROGRESS
                self.ledger.allocate(node)
                self._emit("allocate", node)

    def _adopt(self, events: list[str]) -> None:
        goal = obtain_current_goal(self.root)
        if goal is None:
            self.current_goal = None
            self.cursor = None
            events.append(f"done:{self.root.status.value}")
            return
        fresh = goal is not self.current_goal or goal.status is GoalStatus.UNSTARTED
        self.current_goal = goal
        self._allocate_path(goal)
        if fresh:
            self.cursor = goal.tactic
            events.append(f"adopted:{goal.name}")
            self._emit("adopted", goal)

    # -- the deliberation tick ------------------------------------------------------

    def tick(self) -> TickReport:
        """One sense-reason-act iteration.  Executes at most one action."""
        self._ticks += 1
        tick_no = self._ticks
        events: list[str] = []
        if self.asleep:
            events.append("woke:message" if self.state.inbox else "woke:tick")
            self.asleep = False

        if self.root is None:
            return TickReport(tick_no, self.id, events=("no-goal",))
        if self.root.status in TERMINAL:
            events.append(f"done:{self.root.status.value}")
            return self._report(tick_no, "-", "-", None, False, None, events, None)
        if self.current_goal is None:
            self._adopt(events)
            if self.current_goal is None:
                return self._report(tick_no, "-", "-", None, False, None, events, None)

        goal = self.current_goal
        goal_name = goal.name
        cursor_path = self.cursor.path() if self.cursor is not None else "-"

        # budget check: an exhausted goal fails and the next one is adopted
        if self.ledger.exhausted(goal):
            mark_failed(goal)
            events.append(f"failed:{goal_name}")
            self._emit("goal-failed", goal)
            self._adopt(events)
            return self._report(tick_no, goal_name, cursor_path, None, False, None, events, None, goal)

        # sensing
        try:
            self.state.sense()
            self._emit("refresh", None)
        except SensingError:
            events.append("sensing-error")

        # selection within the cursor's scope
        entries = self.cursor.first_entries(self.state, tick_no)
        self._emit("candidates", [a.id for _, a in entries])
        if not entries:
            self.asleep = True
            self._emit("slept", None)
            return self._report(tick_no, goal_name, cursor_path, None, True, None, events, None, goal)

        actions = [a for _, a in entries]
        chosen = self.selection_policy(actions, self.rng)
        node = next(n for n, a in entries if a is chosen)
        self._emit("chosen", chosen.id)

        # execution; effect errors consume the tick but keep the loop alive
        proposal = None
        error = None
        try:
            proposal = chosen.execute(self.state, tick_no)
            self._emit("executed", chosen.id)
        except Exception as exc:
            error = f"{type(exc).__name__}: {exc}"
            events.append(f"action-error:{type(exc).__name__}")

        # cost models effort: deduct even when the effect failed
        self.ledger.deduct(goal, chosen.cost)
        self._emit("deduct", (chosen.cost, goal))

        solved = False
        if error is None and proposal is not None:
            try:
                solved = bool(goal.evaluate(proposal))
            except Exception as exc:
                error = f"{type(exc).__name__}: {exc}"
                events.append(f"evaluate-error:{type(exc).__name__}")

        if solved:
            mark_solved(goal)
            events.append(f"solved:{goal_name}")
            self._emit("goal-solved", goal)
            self._adopt(events)
        else:
            self.cursor = node.next_node()
        if self._readopt_pending:
            self._readopt_pending = False
            if not solved:
                self._adopt(events)
        return self._report(tick_no, goal_name, cursor_path, chosen.id, False, proposal, events, error, goal)

    def _report(self, tick_no: int, goal_name: str, cursor_path: str, action_id: str | None,
                slept: bool, proposal: Any, events: list[str], error: str | None,
                goal: Goal | None = None) -> TickReport:
        node = goal.node if goal is not None else (
            self.current_goal.node if self.current_goal is not None else None)
        budget_goal = node.remaining if node is not None else UNLIMITED
        budget_root = self.root.remaining if self.root is not None else UNLIMITED
        return TickReport(
            tick=tick_no,
            agent_id=self.id,
            goal_name=goal_name,
            cursor_path=cursor_path,
            action_id=action_id,
            slept=slept,
            proposal=proposal,
            events=tuple(events),
            budget_goal=budget_goal,
            budget_root=budget_root,
            error=error,
        )

    def run(self, max_ticks: int) -> RunReport:
        """Tick until the root goal is terminal or max_ticks is reached."""
        if max_ticks < 1:
            raise ValueError("max_ticks must be >= 1")
        if self.root is None:
            return RunReport("NO_GOAL")
        reports: list[TickReport] = []
        while len(reports) < max_ticks:
            if self.root.status in TERMINAL:
                break
            reports.append(self.tick())
        status = self.root.status.value if self.root.status in TERMINAL else "TIMEOUT"
        return RunReport(status, reports, self.ledger.consumed)


# -- scheduling ----------------------------------------------------------------------


@dataclass
class HarnessReport:
    reports: list[TickReport]
    rounds: int

    def trace_lines(self) -> list[str]:
        return [r.trace_line() for r in self.reports]


class RoundRobinHarness:
    """Deterministic in-process scheduler: one tick per agent per round.

    Agents are ticked in registration order.  Sleep is simulated (a
    SLEPT tick does no work); an incoming message is visible to the
    addressee at its next tick, never mid-tick.
    """

    def __init__(self, agents: Iterable[Agent], com: ComNode | None = None,
                 stop_when: Callable[[], bool] | None = None) -> None:
        self.agents = list(agents)
        self.com = com
        self.stop_when = stop_when

    def run(self, max_rounds: int) -> HarnessReport:
        reports: list[TickReport] = []
        rounds = 0
        for round_no in range(1, max_rounds + 1):
            if self.com is not None:
                self.com.clock = round_no
            rounds = round_no
            active = False
            for agent in self.agents:
                if agent.root is None or agent.root.status in TERMINAL:
                    continue
                reports.append(agent.tick())
                active = True
                if self.stop_when is not None and self.stop_when():
                    return HarnessReport(reports, rounds)
            if not active:
                break
        return HarnessReport(reports, rounds)
