"""Goal structures: the desire layer.

A goal couples a name, a pure predicate over proposals, and the tactic
meant to solve it.  Goals compose into a tree of combinators:

  LIFT(g)        a single goal
  SEQ(G1..Gn)    solved by solving every child, left to right; fails as
                 soon as one child fails
  FIRSTOF(G1..Gn) try children in order until one is solved; fails only
                 when every child has failed
  REPEAT(G)      retry G whenever it fails (for any reason, typically
                 budget exhaustion), re-allocating fresh budget from
                 what the REPEAT node has left; fails when its own
                 budget runs out

Statuses live on the structure nodes (LIFT mirrors its goal's status)
and move only along UNSTARTED -> INPROGRESS -> SOLVED/FAILED, except
that REPEAT resets its child subtree to UNSTARTED on retry.

Two rewrites support dynamic subgoals while an agent runs.  With g0 the
current goal inside SEQ(g0, g1):

  add_after(H)   -> SEQ(g0, H, g1)        (insert a follow-up goal)
  add_before(H)  -> SEQ(REPEAT(SEQ(H, g0)), g1)
                                          (establish a missing
                                          precondition, then retry g0)

If the current goal's parent is not a SEQ, add_after wraps the goal and
H in a fresh SEQ in place.
"""

from __future__ import annotations

import enum
from typing import Any, Callable, Iterator

from .budget import UNLIMITED, format_units
from .tactic import Tactic


class GoalStatus(enum.Enum):
    UNSTARTED = "UNSTARTED"
    INPROGRESS = "INPROGRESS"
    SOLVED = "SOLVED"
    FAILED = "FAILED"


TERMINAL = frozenset({GoalStatus.SOLVED, GoalStatus.FAILED})


class StructKind(enum.Enum):
    LIFT = "LIFT"
    SEQ = "SEQ"
    FIRSTOF = "FIRSTOF"
    REPEAT = "REPEAT"


class Goal:
    """name + evaluate(proposal) -> bool + the tactic to solve it."""

    def __init__(self, name: str, evaluate: Callable[[Any], bool], tactic: Tactic) -> None:
        self.name = name
        self.evaluate = evaluate
        self.tactic = tactic
        self.status = GoalStatus.UNSTARTED
        self.node: GoalStructure | None = None  # set by lift_goal

    def __repr__(self) -> str:
        return f"Goal({self.name!r}, {self.status.value})"


class GoalStructure:
    """One node of a goal tree.  Build with lift_goal/seq/first_of/repeat."""

    def __init__(self, kind: StructKind, goal: Goal | None = None,
                 children: tuple["GoalStructure", ...] = (), bmax: float = UNLIMITED) -> None:
        if kind is StructKind.LIFT:
            if goal is None or children:
                raise ValueError("LIFT wraps exactly one goal")
            if goal.node is not None:
                raise ValueError(f"goal {goal.name!r} already belongs to a structure")
            goal.node = self
        elif kind is StructKind.REPEAT:
            if goal is not None or len(children) != 1:
                raise ValueError("REPEAT has exactly one child")
        else:
            if goal is not None or len(children) < 1:
                raise ValueError(f"{kind.value} needs at least one child")
        self.kind = kind
        self.goal = goal
        self.children: list[GoalStructure] = list(children)
        self.parent: GoalStructure | None = None
        self.child_index: int | None = None
        self.bmax = bmax
        self.remaining: float = UNLIMITED  # overwritten on allocation
        self._status = GoalStatus.UNSTARTED
        for i, child in enumerate(self.children):
            child._attach(self, i)

    def _attach(self, parent: "GoalStructure", index: int) -> None:
        if self.parent is not None:
            raise ValueError("goal-structure nodes cannot be shared between trees")
        self.parent = parent
        self.child_index = index

    # -- status ---------------------------------------------------------------

    @property
    def status(self) -> GoalStatus:
        if self.kind is StructKind.LIFT:
            return self.goal.status
        return self._status

    @status.setter
    def status(self, value: GoalStatus) -> None:
        if self.kind is StructKind.LIFT:
            self.goal.status = value
        else:
            self._status = value

    # -- structure --------------------------------------------------------------

    def nodes(self) -> Iterator["GoalStructure"]:
        yield self
        for child in self.children:
            yield from child.nodes()

    def goals(self) -> list[Goal]:
        return [n.goal for n in self.nodes() if n.kind is StructKind.LIFT]

    def root(self) -> "GoalStructure":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def path_from_root(self) -> list["GoalStructure"]:
        chain: list[GoalStructure] = []
        node: GoalStructure | None = self
        while node is not None:
            chain.append(node)
            node = node.parent
        chain.reverse()
        return chain

    def reset_subtree(self) -> None:
        """Set this node and all descendants back to UNSTARTED (REPEAT retry)."""
        for node in self.nodes():
            node.status = GoalStatus.UNSTARTED

    def _insert_child(self, index: int, child: "GoalStructure") -> None:
        child._attach(self, index)
        self.children.insert(index, child)
        for i, c in enumerate(self.children):
            c.child_index = i

    # -- debugging ---------------------------------------------------------------

    def render(self) -> str:
        """One node per line: kind name [status] budget=remaining/bmax."""
        lines: list[str] = []

        def walk(node: GoalStructure, depth: int) -> None:
            name = node.goal.name if node.kind is StructKind.LIFT else "-"
            budget = f"{format_units(node.remaining)}/{format_units(node.bmax)}"
            lines.append("  " * depth + f"{node.kind.value} {name} [{node.status.value}] budget={budget}")
            for child in node.children:
                walk(child, depth + 1)

        walk(self, 0)
        return "\n".join(lines)

    def __repr__(self) -> str:
        if self.kind is StructKind.LIFT:
            return f"GoalStructure(LIFT {self.goal.name!r})"
        return f"GoalStructure({self.kind.value}, {len(self.children)} children)"


def lift_goal(goal: Goal, bmax: float = UNLIMITED) -> GoalStructure:
    return GoalStructure(StructKind.LIFT, goal=goal, bmax=bmax)


def seq(*children: GoalStructure, bmax: float = UNLIMITED) -> GoalStructure:
    return GoalStructure(StructKind.SEQ, children=children, bmax=bmax)


def first_of(*children: GoalStructure, bmax: float = UNLIMITED) -> GoalStructure:
    return GoalStructure(StructKind.FIRSTOF, children=children, bmax=bmax)


def repeat(child: GoalStructure, bmax: float = UNLIMITED) -> GoalStructure:
    return GoalStructure(StructKind.REPEAT, children=(child,), bmax=bmax)


# -- status propagation ---------------------------------------------------------


def _combine(node: GoalStructure) -> GoalStatus:
    """Status a combinator node should have, given its children.

    Promote-only: never demotes an INPROGRESS node back to UNSTARTED.
    REPEAT intercepts a failed child while it still has budget left.
    """
    children = node.children
    statuses = [c.status for c in children]
    if node.kind is StructKind.SEQ:
        if GoalStatus.FAILED in statuses:
            return GoalStatus.FAILED
        if all(s is GoalStatus.SOLVED for s in statuses):
            return GoalStatus.SOLVED
    elif node.kind is StructKind.FIRSTOF:
        if GoalStatus.SOLVED in statuses:
            return GoalStatus.SOLVED
        if all(s is GoalStatus.FAILED for s in statuses):
            return GoalStatus.FAILED
    elif node.kind is StructKind.REPEAT:
        child = statuses[0]
        if child is GoalStatus.SOLVED:
            return GoalStatus.SOLVED
        if child is GoalStatus.FAILED and not (node.remaining > 0):
            return GoalStatus.FAILED
    if node.status is GoalStatus.UNSTARTED and any(s is not GoalStatus.UNSTARTED for s in statuses):
        return GoalStatus.INPROGRESS
    return node.status


def _propagate(node: GoalStructure | None) -> None:
    while node is not None:
        new = _combine(node)
        if new is node.status:
            break
        node.status = new
        node = node.parent


def mark_solved(goal: Goal) -> None:
    """Record that the current goal's predicate accepted a proposal."""
    goal.status = GoalStatus.SOLVED
    if goal.node is not None:
        _propagate(goal.node.parent)


def mark_failed(goal: Goal) -> None:
    """Record that the current goal failed (typically: budget exhausted)."""
    goal.status = GoalStatus.FAILED
    if goal.node is not None:
        _propagate(goal.node.parent)


# -- current-goal selection -------------------------------------------------------


def obtain_current_goal(root: GoalStructure) -> Goal | None:
    """Depth-first selection of the goal the agent should commit to.

    SEQ descends into its leftmost unsolved child, FIRSTOF into its
    leftmost unfailed child.  REPEAT descends into its child, first
    resetting the child subtree to UNSTARTED if the child failed and the
    REPEAT node still has budget.  Returns None iff the root is
    terminal.
    """
    node = root
    while True:
        if node.status in TERMINAL:
            return None
        if node.kind is StructKind.LIFT:
            return node.goal
        if node.kind is StructKind.SEQ:
            node = next(c for c in node.children if c.status is not GoalStatus.SOLVED)
        elif node.kind is StructKind.FIRSTOF:
            node = next(c for c in node.children if c.status is not GoalStatus.FAILED)
        else:  # REPEAT
            child = node.children[0]
            if child.status is GoalStatus.FAILED:
                # consistent trees only reach here with budget left
                child.reset_subtree()
            node = child


# -- dynamic subgoals ----------------------------------------------------------------


def add_after(current: Goal, new_structure: GoalStructure) -> GoalStructure:
    """Insert ``new_structure`` as the next sibling of the current goal.

    If the current goal's parent is not a SEQ (or it is the root), the
    goal is wrapped in a fresh SEQ together with the insert.  Returns
    the (possibly new) root of the tree.
    """
    node = current.node
    if node is None:
        raise ValueError(f"goal {current.name!r} is not part of a structure")
    if new_structure.parent is not None:
        raise ValueError("inserted structure already belongs to a tree")
    parent = node.parent
    if parent is not None and parent.kind is StructKind.SEQ:
        parent._insert_child(node.child_index + 1, new_structure)
        return parent.root()
    index = node.child_index
    node.parent = None
    node.child_index = None
    wrapper = GoalStructure(StructKind.SEQ, children=(node, new_structure))
    if parent is None:
        return wrapper
    wrapper._attach(parent, index)
    parent.children[index] = wrapper
    return parent.root()


def add_before(current: Goal, new_structure: GoalStructure, bmax: float = UNLIMITED) -> GoalStructure:
    """Replace the current goal g0 in place by REPEAT(SEQ(new_structure, g0)).

    The REPEAT makes a failure of g0 fall back to the inserted
    structure instead of propagating; ``bmax`` caps how much budget the
    retry loop may consume.  Returns the (possibly new) root.
    """
    node = current.node
    if node is None:
        raise ValueError(f"goal {current.name!r} is not part of a structure")
    if new_structure.parent is not None:
        raise ValueError("inserted structure already belongs to a tree")
    parent = node.parent
    index = node.child_index
    if parent is not None:
        node.parent = None
        node.child_index = None
    inner = GoalStructure(StructKind.SEQ, children=(new_structure, node))
    wrapper = GoalStructure(StructKind.REPEAT, children=(inner,), bmax=bmax)
    if parent is None:
        return wrapper
    wrapper._attach(parent, index)
    parent.children[index] = wrapper
    return parent.root()
