"""Command-line harness: run packaged scenarios deterministically.

    tactical-agents --scenario gomoku-tactic-vs-dumb --seed 1 --games 1

Scenarios:
  gomoku-dumb-vs-dumb    two random players
  gomoku-tactic-vs-dumb  priority-tactic player (cross) vs random player
  goal-structure-demo    budgeted REPEAT retries over a scripted counter
  messaging-demo         broadcast/singlecast/rolecast with wake-on-message

Every run is fully determined by (scenario, seed, config): the same
invocation produces byte-identical traces.  The summary is one
machine-parseable line of key=value pairs in stable order; ``--games N``
plays a small tournament over seeds seed..seed+N-1 and prints a table.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Callable

from .budget import UNLIMITED, format_units
from .environment import ScriptedEnvironment
from .goal import Goal, lift_goal, repeat, seq
from .runtime import Address, Agent, AgentState, ComNode, RoundRobinHarness
from .tactic import lift
from .tactic import seq as tactic_seq
from . import gomoku


@dataclass
class RunConfig:
    scenario: str
    seed: int = 0
    max_ticks: int = 10_000
    board_size: int = 8
    budget: float = UNLIMITED
    games: int = 1
    trace_out: str | None = None
    repeat_budget: float = UNLIMITED


@dataclass
class ScenarioResult:
    summary: dict
    trace_lines: list[str] = field(default_factory=list)

    def summary_line(self) -> str:
        parts = []
        for key, value in self.summary.items():
            if isinstance(value, float):
                value = format_units(value) if value == UNLIMITED else f"{value:.4f}"
            parts.append(f"{key}={value}")
        return " ".join(parts)


def _gomoku_scenario(config: RunConfig, cross_player: str) -> ScenarioResult:
    result = gomoku.play_match(
        size=config.board_size,
        seed=config.seed,
        cross_player=cross_player,
        circle_player="dumb",
        max_rounds=config.max_ticks,
        budget=config.budget,
        repeat_budget=config.repeat_budget,
    )
    summary = {
        "scenario": config.scenario,
        "seed": config.seed,
        "board": config.board_size,
        "winner": result.winner or "draw",
        "plies": result.plies,
        "rounds": result.rounds,
    }
    return ScenarioResult(summary, result.trace_lines())


def _goal_structure_demo(config: RunConfig) -> ScenarioResult:
    """A counter environment drives a staged goal with a budgeted REPEAT.

    The middle stage is under-budgeted on purpose, so its first episode
    exhausts, the REPEAT resets, and the retry succeeds once the counter
    has grown.  The trace shows adoption, failure, reset, and fresh
    allocation events.
    """

    def bump(state: dict) -> None:
        state["counter"] += 1

    env = ScriptedEnvironment({"counter": 0}, [bump] * max(config.max_ticks, 64))
    state = AgentState(env)
    agent = Agent("counter-agent", state, budget=config.budget, seed=config.seed)

    def observe_action(action_id: str):
        from .action import Action

        def guard(s: AgentState):
            return s.env.snapshot["counter"]

        def effect(s: AgentState, counter: int):
            return counter

        return Action(action_id, effect, guard)

    def reach(name: str, threshold: int, action_id: str) -> Goal:
        return Goal(name, lambda v: v >= threshold, lift(observe_action(action_id)))

    structure = seq(
        repeat(
            seq(lift_goal(reach("reach-2", 2, "watch-a")),
                lift_goal(reach("reach-6", 6, "watch-b"), bmax=2)),
            bmax=10,
        ),
        lift_goal(reach("reach-8", 8, "watch-c")),
    )
    agent.set_goal(structure)
    report = agent.run(config.max_ticks)
    summary = {
        "scenario": config.scenario,
        "seed": config.seed,
        "status": report.status,
        "ticks": report.ticks_used,
        "budget_consumed": format_units(report.consumed),
    }
    return ScenarioResult(summary, report.trace_lines())


def _messaging_demo(config: RunConfig) -> ScenarioResult:
    """Three agents on one node: listeners sleep until messages arrive."""
    from .action import Action

    node = ComNode()

    def listener(agent_id: str, expected: int) -> Agent:
        state = AgentState()
        state.processed = 0
        agent = Agent(agent_id, state, seed=config.seed, role="listener")

        def guard(s: AgentState):
            return s.inbox[0] if s.inbox else None

        def effect(s: AgentState, _message):
            s.take_message()
            s.processed += 1
            return s.processed

        goal = Goal("drain-inbox", lambda v: v >= expected, lift(Action("process", effect, guard)))
        agent.set_goal(lift_goal(goal))
        return agent

    def announcer() -> Agent:
        agent = Agent("announcer", AgentState(), seed=config.seed, role="speaker")

        def send_action(action_id: str, address: Address, payload: str, step: int) -> Action:
            def effect(s: AgentState, _witness):
                s.agent.send(address, payload)
                return step

            return Action(action_id, effect)

        tactic = tactic_seq(
            lift(send_action("shout", Address.broadcast(), "hello-everyone", 1)),
            lift(send_action("whisper", Address.to("listener-a"), "just-you", 2)),
            lift(send_action("call-role", Address.role("listener"), "all-listeners", 3)),
        )
        agent.set_goal(lift_goal(Goal("announce-3", lambda v: v >= 3, tactic)))
        return agent

    listener_a = listener("listener-a", 3)  # broadcast + singlecast + rolecast
    listener_b = listener("listener-b", 2)  # broadcast + rolecast
    speaker = announcer()
    for agent, role in ((listener_a, "listener"), (listener_b, "listener"), (speaker, "speaker")):
        node.register(agent, role)

    harness = RoundRobinHarness([listener_a, listener_b, speaker], com=node)
    report = harness.run(config.max_ticks)
    summary = {
        "scenario": config.scenario,
        "seed": config.seed,
        "rounds": report.rounds,
        "sends": len(node.sends),
        "delivered": node.delivered_total,
        "statuses": "/".join(a.root.status.value for a in (listener_a, listener_b, speaker)),
    }
    return ScenarioResult(summary, report.trace_lines())


SCENARIOS: dict[str, Callable[[RunConfig], ScenarioResult]] = {
    "gomoku-dumb-vs-dumb": lambda cfg: _gomoku_scenario(cfg, "dumb"),
    "gomoku-tactic-vs-dumb": lambda cfg: _gomoku_scenario(cfg, "tactic"),
    "goal-structure-demo": _goal_structure_demo,
    "messaging-demo": _messaging_demo,
}


def run_scenario(config: RunConfig) -> ScenarioResult:
    try:
        runner = SCENARIOS[config.scenario]
    except KeyError:
        raise ValueError(f"unknown scenario: {config.scenario!r}") from None
    return runner(config)


def tournament(config: RunConfig) -> tuple[list[ScenarioResult], dict]:
    """Play ``games`` matches with seed = base+i and aggregate the outcomes."""
    results = []
    tally = {"cross": 0, "circle": 0, "draw": 0}
    for i in range(config.games):
        game_config = RunConfig(
            scenario=config.scenario,
            seed=config.seed + i,
            max_ticks=config.max_ticks,
            board_size=config.board_size,
            budget=config.budget,
            repeat_budget=config.repeat_budget,
        )
        result = run_scenario(game_config)
        results.append(result)
        winner = result.summary.get("winner", "draw")
        key = {"cross": "cross", "circle": "circle"}.get(winner, "draw")
        tally[key] += 1
    aggregate = {
        "scenario": config.scenario,
        "games": config.games,
        "base_seed": config.seed,
        "cross_wins": tally["cross"],
        "circle_wins": tally["circle"],
        "draws": tally["draw"],
        "cross_rate": tally["cross"] / config.games,
    }
    return results, aggregate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tactical-agents",
        description="Run packaged agent scenarios deterministically.",
    )
    parser.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-ticks", type=int, default=10_000)
    parser.add_argument("--board-size", type=int, default=8)
    parser.add_argument("--budget", type=float, default=None,
                        help="initial agent budget (default: unbounded)")
    parser.add_argument("--games", type=int, default=1)
    parser.add_argument("--trace-out", default=None, help="write the trace to this file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.board_size < 1:
        parser.error("--board-size must be positive")
    if args.max_ticks < 1:
        parser.error("--max-ticks must be positive")
    if args.games < 1:
        parser.error("--games must be at least 1")
    if args.budget is not None and args.budget <= 0:
        parser.error("--budget must be positive")
    config = RunConfig(
        scenario=args.scenario,
        seed=args.seed,
        max_ticks=args.max_ticks,
        board_size=args.board_size,
        budget=args.budget if args.budget is not None else UNLIMITED,
        games=args.games,
        trace_out=args.trace_out,
    )
    if config.games > 1:
        results, aggregate = tournament(config)
        print(f"{'game':>4} {'seed':>6} {'winner':>8} {'plies':>6} {'rounds':>7}")
        for i, result in enumerate(results):
            s = result.summary
            print(f"{i:>4} {s['seed']:>6} {s.get('winner', '-'):>8} "
                  f"{s.get('plies', '-'):>6} {s.get('rounds', '-'):>7}")
        print(" ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                       for k, v in aggregate.items()))
        trace_lines = [line for result in results for line in result.trace_lines]
    else:
        result = run_scenario(config)
        print(result.summary_line())
        trace_lines = result.trace_lines
    if config.trace_out:
        with open(config.trace_out, "w", encoding="utf-8") as handle:
            handle.write("\n".join(trace_lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
