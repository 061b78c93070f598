"""Tactic trees: hierarchical composition of actions.

A tactic is a tree with actions at the leaves and combinators at the
inner nodes:

  PRIMITIVE(action)        execute the action (if its guard fires)
  SEQ(T1..Tn)              execute the sub-tactics in order, one action
                           per tick
  ANYOF(T1..Tn)            pick among the enabled sub-tactics
  FIRSTOF(T1..Tn)          pick the first enabled sub-tactic

Two traversals define the execution semantics.  ``first(T, s)`` is the
set of actions eligible to start T on state s:

  first(PRIMITIVE(a), s)   = {a} if a is enabled on s, else {}
  first(SEQ(T1..Tn), s)    = first(T1, s)
  first(ANYOF(T1..Tn), s)  = union of first(Ti, s)
  first(FIRSTOF(T1..Tn),s) = first of the leftmost enabled Ti, else {}

``next(U)`` is the sub-tactic scheduled after U completes: the next
sibling inside a SEQ, otherwise the parent's next, and the root maps to
itself (restarting the whole tactic).

Trees are immutable after construction and carry no execution state;
the runtime keeps a cursor (the current sub-tactic) per agent, so one
tactic definition can be shared across agents.
"""

from __future__ import annotations

import enum
from typing import Any, Iterator

from .action import Action


class TacticKind(enum.Enum):
    PRIMITIVE = "PRIMITIVE"
    SEQ = "SEQ"
    ANYOF = "ANYOF"
    FIRSTOF = "FIRSTOF"


class Tactic:
    """One node of a tactic tree.  Build with lift/seq/any_of/first_of."""

    def __init__(self, kind: TacticKind, action: Action | None = None,
                 children: tuple["Tactic", ...] = ()) -> None:
        if kind is TacticKind.PRIMITIVE:
            if action is None or children:
                raise ValueError("PRIMITIVE wraps exactly one action and has no children")
        else:
            if action is not None or len(children) < 1:
                raise ValueError(f"{kind.value} needs at least one child tactic")
        self.kind = kind
        self.action = action
        self.children = tuple(children)
        self.parent: Tactic | None = None
        self.child_index: int | None = None
        for i, child in enumerate(self.children):
            if child.parent is not None:
                raise ValueError("tactic nodes cannot be shared between trees")
            child.parent = self
            child.child_index = i
        if kind is not TacticKind.PRIMITIVE:
            seen: set[str] = set()
            for leaf in self.leaves():
                if leaf.action.id in seen:
                    raise ValueError(f"duplicate action id {leaf.action.id!r} in one tactic tree")
                seen.add(leaf.action.id)

    # -- structure ---------------------------------------------------------

    @property
    def is_root(self) -> bool:
        return self.parent is None

    def root(self) -> "Tactic":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def nodes(self) -> Iterator["Tactic"]:
        yield self
        for child in self.children:
            yield from child.nodes()

    def leaves(self) -> list["Tactic"]:
        return [n for n in self.nodes() if n.kind is TacticKind.PRIMITIVE]

    def leaf_for(self, action: Action) -> "Tactic":
        for leaf in self.leaves():
            if leaf.action is action:
                return leaf
        raise ValueError(f"action {action.id!r} is not a leaf of this tactic tree")

    def path(self) -> str:
        """Dotted child-index path from the root, e.g. 'r.0.2'."""
        parts: list[str] = []
        node = self
        while node.parent is not None:
            parts.append(str(node.child_index))
            node = node.parent
        parts.append("r")
        return ".".join(reversed(parts))

    # -- selection semantics -----------------------------------------------

    def first_entries(self, state: Any, token: Any = None) -> list[tuple["Tactic", Action]]:
        """Like first(), but pairs each eligible action with its leaf node."""
        if self.kind is TacticKind.PRIMITIVE:
            assert self.action is not None
            if self.action.is_enabled(state, token):
                return [(self, self.action)]
            return []
        if self.kind is TacticKind.SEQ:
            return self.children[0].first_entries(state, token)
        if self.kind is TacticKind.ANYOF:
            entries: list[tuple[Tactic, Action]] = []
            for child in self.children:
                entries.extend(child.first_entries(state, token))
            return entries
        # FIRSTOF: leftmost enabled child wins
        for child in self.children:
            entries = child.first_entries(state, token)
            if entries:
                return entries
        return []

    def first(self, state: Any, token: Any = None) -> list[Action]:
        """Actions eligible to start/continue this tactic on the given state."""
        return [action for _, action in self.first_entries(state, token)]

    def enabled(self, state: Any, token: Any = None) -> bool:
        return bool(self.first_entries(state, token))

    def next_node(self) -> "Tactic":
        """The sub-tactic scheduled after this node completes.

        Inside a SEQ and not last: the next sibling.  Last in a SEQ, or
        inside ANYOF/FIRSTOF: the parent's next.  The root maps to
        itself, which restarts the tactic from its first action.
        """
        if self.parent is None:
            return self
        parent = self.parent
        assert self.child_index is not None
        if parent.kind is TacticKind.SEQ and self.child_index < len(parent.children) - 1:
            return parent.children[self.child_index + 1]
        return parent.next_node()

    def next_actions(self, completed: Action, state: Any, token: Any = None) -> list[Action]:
        """Candidates after ``completed`` ran: first(next(leaf), state)."""
        return self.leaf_for(completed).next_node().first(state, token)

    # -- debugging -----------------------------------------------------------

    def render(self) -> str:
        """One node per line, two-space indent per depth."""
        lines: list[str] = []

        def walk(node: Tactic, depth: int) -> None:
            label = node.kind.value
            if node.kind is TacticKind.PRIMITIVE:
                label += f" {node.action.id}"
            lines.append("  " * depth + label)
            for child in node.children:
                walk(child, depth + 1)

        walk(self, 0)
        return "\n".join(lines)

    def __repr__(self) -> str:
        if self.kind is TacticKind.PRIMITIVE:
            return f"Tactic({self.action.id!r})"
        return f"Tactic({self.kind.value}, {len(self.children)} children)"


def lift(action: Action) -> Tactic:
    """Wrap a single action as a tactic."""
    return Tactic(TacticKind.PRIMITIVE, action=action)


def seq(*children: Tactic) -> Tactic:
    return Tactic(TacticKind.SEQ, children=children)


def any_of(*children: Tactic) -> Tactic:
    return Tactic(TacticKind.ANYOF, children=children)


def first_of(*children: Tactic) -> Tactic:
    return Tactic(TacticKind.FIRSTOF, children=children)
