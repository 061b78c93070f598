"""Commitment control: budget allocation and deduction over goal trees.

Every goal-structure node carries a cap (``bmax``, default unlimited)
and a remaining allowance.  When a node becomes current it is allocated
min(bmax, parent remaining); nodes that stay current keep whatever they
have.  Each executed action's cost is deducted from the current goal
and every current ancestor up to the root, so remaining budget can only
shrink toward the leaves and the current goal is always the first node
to exhaust.  Checking exhaustion at the current goal alone is therefore
sound.

Unlimited budget is the float infinity, which absorbs subtraction.  A
deduction may push a node at most one step below zero (exhaustion is
checked before acting, not after).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

UNLIMITED = math.inf


def format_units(value: float) -> str:
    """Render a budget value compactly: integers stay integers, inf is 'inf'."""
    if value == UNLIMITED:
        return "inf"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


@dataclass
class AllocationEvent:
    node: Any
    allocated: float
    parent_remaining: float


@dataclass
class DeductionEvent:
    cost: float
    # (node, remaining after the deduction) for the current goal chain,
    # leaf first
    chain: tuple = ()


@dataclass
class BudgetLedger:
    """Per-agent budget accounting: the initial allowance and an event log."""

    initial: float = UNLIMITED
    consumed: float = 0
    allocations: list[AllocationEvent] = field(default_factory=list)
    deductions: list[DeductionEvent] = field(default_factory=list)

    def allocate(self, node: Any) -> float:
        """Allocate budget for a node that is becoming current.

        The node receives min(node.bmax, parent remaining); for the root
        the parent allowance is the agent's initial budget.
        """
        parent_remaining = node.parent.remaining if node.parent is not None else self.initial
        node.remaining = min(node.bmax, parent_remaining)
        self.allocations.append(AllocationEvent(node, node.remaining, parent_remaining))
        return node.remaining

    def deduct(self, current_goal: Any, cost: float) -> None:
        """Subtract cost from the current goal's node and every ancestor."""
        if cost < 0:
            raise ValueError("cost must be non-negative")
        chain = []
        node = current_goal.node
        while node is not None:
            node.remaining -= cost
            chain.append((node, node.remaining))
            node = node.parent
        self.consumed += cost
        self.deductions.append(DeductionEvent(cost, tuple(chain)))

    def exhausted(self, current_goal: Any) -> bool:
        """True iff the current goal has no budget left (remaining <= 0)."""
        return not (current_goal.node.remaining > 0)
