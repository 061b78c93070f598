"""BDI agents with tactic trees, budgeted goal structures, and a logic backend.

The layers, bottom up:

  environment  sensing/command interface over a real environment
  action       guarded effectful steps (the leaves that do the work)
  tactic       PRIMITIVE/SEQ/ANYOF/FIRSTOF composition with first/next
               selection semantics
  goal         LIFT/SEQ/FIRSTOF/REPEAT goal structures with status
               propagation and dynamic insertion
  budget       allocation and deduction along the current goal chain
  runtime      the tick-driven deliberation loop, messaging, scheduling
  logic        a small Horn-clause engine for declarative guards
  gomoku       the end-to-end board-game integration
  cli          deterministic scenario runner
"""

from .action import Action, ContractViolation
from .budget import UNLIMITED, BudgetLedger
from .environment import (
    CommandRejected,
    CommandResult,
    Environment,
    ScriptedEnvironment,
    SensingError,
)
from .goal import (
    Goal,
    GoalStatus,
    GoalStructure,
    add_after,
    add_before,
    lift_goal,
    mark_failed,
    mark_solved,
    obtain_current_goal,
)
from .logic import KnowledgeBase, KnowledgeState, compound, parse_program, rule, unify
from .runtime import (
    Address,
    Agent,
    AgentState,
    ComNode,
    Message,
    RoundRobinHarness,
    RunReport,
    TickReport,
    choose,
)
from .tactic import Tactic, any_of, first_of, lift, seq

__all__ = [
    "Action",
    "Address",
    "Agent",
    "AgentState",
    "BudgetLedger",
    "ComNode",
    "CommandRejected",
    "CommandResult",
    "ContractViolation",
    "Environment",
    "Goal",
    "GoalStatus",
    "GoalStructure",
    "KnowledgeBase",
    "KnowledgeState",
    "Message",
    "RoundRobinHarness",
    "RunReport",
    "ScriptedEnvironment",
    "SensingError",
    "Tactic",
    "TickReport",
    "UNLIMITED",
    "add_after",
    "add_before",
    "any_of",
    "choose",
    "compound",
    "first_of",
    "lift",
    "lift_goal",
    "mark_failed",
    "mark_solved",
    "obtain_current_goal",
    "parse_program",
    "rule",
    "seq",
    "unify",
]
