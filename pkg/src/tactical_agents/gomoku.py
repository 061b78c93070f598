"""GoMoku: the end-to-end integration fixture.

Two players alternate placing pieces on an N x N board; five consecutive
pieces of one type in a row, column, or diagonal win (six or more also
count).  The module provides the board rules, an Environment exposing
them to agents, guard/effect builders for the standard actions, the
priority tactic and staged goal structure used by the demo player, and
a deterministic match driver.

Board fixtures use one line per row with characters '.', 'x', 'o'.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

from . import goal as goals
from .action import Action
from .budget import UNLIMITED
from .environment import CommandRejected, Environment
from .goal import Goal, GoalStructure
from .logic import Clause, Const, KnowledgeBase, KnowledgeState, Not, Struct, Var, compound, rule
from .runtime import Agent, AgentState, RoundRobinHarness, TickReport
from .tactic import Tactic, any_of, first_of, lift

CROSS = "cross"
CIRCLE = "circle"
_CHARS = {CROSS: "x", CIRCLE: "o", None: "."}
_PIECES = {"x": CROSS, "o": CIRCLE, ".": None}

_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


class Square(NamedTuple):
    x: int
    y: int


def opponent(piece: str) -> str:
    return CIRCLE if piece == CROSS else CROSS


class Board:
    """Board state plus the move rules; doubles as the real environment."""

    def __init__(self, size: int = 12) -> None:
        if size < 1:
            raise ValueError("board size must be positive")
        self.size = size
        self.cells: list[list[str | None]] = [[None] * size for _ in range(size)]
        self.turn = CROSS
        self.winner: str | None = None
        self.plies = 0
        self._filled = 0

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.size and 0 <= y < self.size

    def piece_at(self, x: int, y: int) -> str | None:
        return self.cells[y][x]

    @property
    def full(self) -> bool:
        return self._filled == self.size * self.size

    @property
    def game_over(self) -> bool:
        return self.winner is not None or self.full

    def move(self, piece: str, x: int, y: int) -> None:
        """Place a piece under the game rules; rejects with a reason."""
        if piece not in (CROSS, CIRCLE):
            raise CommandRejected(f"unknown piece type: {piece}")
        if self.game_over:
            raise CommandRejected("game over")
        if not self.in_bounds(x, y):
            raise CommandRejected("out of bounds")
        if self.cells[y][x] is not None:
            raise CommandRejected("occupied")
        if piece != self.turn:
            raise CommandRejected("out of turn")
        self.cells[y][x] = piece
        self._filled += 1
        self.plies += 1
        if self.has_five(piece):
            self.winner = piece
        self.turn = opponent(piece)

    def place(self, piece: str, x: int, y: int) -> None:
        """Fixture helper: put a piece down without turn bookkeeping."""
        if self.cells[y][x] is not None:
            raise ValueError(f"cell ({x},{y}) already occupied")
        self.cells[y][x] = piece
        self._filled += 1

    def empty_squares(self) -> list[Square]:
        return [Square(x, y)
                for y in range(self.size)
                for x in range(self.size)
                if self.cells[y][x] is None]

    def has_five(self, piece: str) -> bool:
        for y in range(self.size):
            row = self.cells[y]
            for x in range(self.size):
                if row[x] != piece:
                    continue
                for dx, dy in _DIRECTIONS:
                    px, py = x - dx, y - dy
                    if self.in_bounds(px, py) and self.cells[py][px] == piece:
                        continue  # not the start of the run
                    count = 0
                    cx, cy = x, y
                    while self.in_bounds(cx, cy) and self.cells[cy][cx] == piece:
                        count += 1
                        cx += dx
                        cy += dy
                    if count >= 5:
                        return True
        return False

    def cross_win(self) -> bool:
        return self.has_five(CROSS)

    def circle_win(self) -> bool:
        return self.has_five(CIRCLE)

    def counts(self) -> dict[str, int]:
        out = {CROSS: 0, CIRCLE: 0}
        for row in self.cells:
            for cell in row:
                if cell is not None:
                    out[cell] += 1
        return out

    def copy(self) -> "Board":
        clone = Board(self.size)
        clone.cells = [row[:] for row in self.cells]
        clone.turn = self.turn
        clone.winner = self.winner
        clone.plies = self.plies
        clone._filled = self._filled
        return clone

    def render(self) -> str:
        return "\n".join("".join(_CHARS[cell] for cell in row) for row in self.cells)

    @classmethod
    def from_text(cls, text: str, turn: str | None = None) -> "Board":
        lines = [line.strip() for line in text.strip().splitlines()]
        size = len(lines)
        board = cls(size)
        for y, line in enumerate(lines):
            if len(line) != size:
                raise ValueError("board fixtures must be square")
            for x, char in enumerate(line):
                piece = _PIECES[char]
                if piece is not None:
                    board.place(piece, x, y)
        counts = board.counts()
        if turn is not None:
            board.turn = turn
        else:
            board.turn = CROSS if counts[CROSS] <= counts[CIRCLE] else CIRCLE
        board.plies = board._filled
        if board.cross_win():
            board.winner = CROSS
        elif board.circle_win():
            board.winner = CIRCLE
        return board


class GomokuEnvironment(Environment):
    """Agent-side interface over a shared Board acting as the real game.

    The snapshot (``board``) is refreshed by sensing; a successful own
    ``move`` command is echoed into the snapshot immediately, so effects
    can inspect the position they just created.
    """

    def __init__(self, game: Board) -> None:
        super().__init__()
        self._game = game
        self.board = game.copy()
        self.register_command("move", self._handle_move)

    def _sense(self) -> None:
        self.board = self._game.copy()

    def _handle_move(self, agent_id: str, args) -> Square:
        piece, x, y = args
        self._game.move(piece, x, y)
        self.board = self._game.copy()
        return Square(x, y)

    # snapshot queries
    def empty_squares(self) -> list[Square]:
        return self.board.empty_squares()

    def cross_win(self) -> bool:
        return self.board.cross_win()

    def circle_win(self) -> bool:
        return self.board.circle_win()

    @property
    def turn(self) -> str:
        return self.board.turn

    @property
    def game_over(self) -> bool:
        return self.board.game_over


# -- position analysis ------------------------------------------------------------


_window_cache: dict[int, tuple[tuple[Square, ...], ...]] = {}


def line_windows(size: int) -> tuple[tuple[Square, ...], ...]:
    """All length-5 alignments on a board, precomputed once per size."""
    cached = _window_cache.get(size)
    if cached is not None:
        return cached
    windows: list[tuple[Square, ...]] = []
    for dx, dy in _DIRECTIONS:
        for y in range(size):
            for x in range(size):
                ex, ey = x + 4 * dx, y + 4 * dy
                if 0 <= ex < size and 0 <= ey < size:
                    windows.append(tuple(Square(x + i * dx, y + i * dy) for i in range(5)))
    result = tuple(windows)
    _window_cache[size] = result
    return result


def immediate_wins(board: Board, piece: str) -> list[Square]:
    """Empty squares that complete five-in-a-row for ``piece``, in a fixed order."""
    found: dict[Square, None] = {}
    for window in line_windows(board.size):
        empty = None
        count = 0
        for sq in window:
            cell = board.cells[sq.y][sq.x]
            if cell == piece:
                count += 1
            elif cell is None:
                if empty is not None:
                    empty = None
                    break
                empty = sq
            else:
                empty = None
                break
        if count == 4 and empty is not None:
            found.setdefault(empty)
    return list(found)


def has_cluster(board: Board, piece: str, k: int = 3, window: int = 3) -> bool:
    """True iff some window x window area holds at least k own pieces."""
    size = board.size
    span = min(window, size)
    for y0 in range(size - span + 1):
        for x0 in range(size - span + 1):
            count = 0
            for y in range(y0, y0 + span):
                for x in range(x0, x0 + span):
                    if board.cells[y][x] == piece:
                        count += 1
            if count >= k:
                return True
    return False


@dataclass(frozen=True)
class MoveOutcome:
    """Observations an effect reports after moving, for goal predicates.

    ``win`` is the post-move five-in-a-row check for the mover;
    ``nucleus`` and ``double_threat`` feed the staged goal structure.
    """

    square: Square
    win: bool
    nucleus: bool
    double_threat: bool

    def __str__(self) -> str:
        return (f"sq=({self.square.x},{self.square.y}),win={int(self.win)},"
                f"nucleus={int(self.nucleus)},threat2={int(self.double_threat)}")


def assess_move(board: Board, piece: str, square: Square,
                nucleus_k: int = 3, nucleus_window: int = 3) -> MoveOutcome:
    return MoveOutcome(
        square=square,
        win=board.has_five(piece),
        nucleus=has_cluster(board, piece, nucleus_k, nucleus_window),
        double_threat=len(immediate_wins(board, piece)) >= 2,
    )


# -- declarative winning-move rules -------------------------------------------------


def support_rules() -> list[Clause]:
    """occupied/2 over the per-piece occupancy facts (negated in the win rules)."""
    return [
        rule(compound("occupied", "X", "Y"), compound("occupiedBy", CROSS, "X", "Y")),
        rule(compound("occupied", "X", "Y"), compound("occupiedBy", CIRCLE, "X", "Y")),
    ]


def _winning_move_rule(piece: str, dx: int, dy: int, gap: int) -> Clause:
    """One alignment rule: four own pieces and one empty at offset ``gap``.

    Cell j of the window sits at (Xa + (j-a)*dx, Ya + (j-a)*dy) relative
    to the anchor cell a; coordinates are chained with integer
    arithmetic so every lookup after the anchor is ground.
    """
    anchor = 1 if gap == 0 else 0

    def xv(j: int) -> Var:
        if dx == 0 or j == gap:
            return Var("X")
        return Var(f"X{j}")

    def yv(j: int) -> Var:
        if dy == 0 or j == gap:
            return Var("Y")
        return Var(f"Y{j}")

    def coord_literals(j: int) -> list[Struct]:
        literals = []
        for d, v, va in ((dx, xv(j), xv(anchor)), (dy, yv(j), yv(anchor))):
            if d != 0:
                delta = (j - anchor) * d
                op = "+" if delta > 0 else "-"
                literals.append(Struct("is", (v, Struct(op, (va, Const(abs(delta)))))))
        return literals

    body: list = [compound("occupiedBy", piece, xv(anchor), yv(anchor))]
    others = sorted((j for j in range(5) if j not in (anchor, gap)),
                    key=lambda j: abs(j - anchor))
    for j in others:
        body.extend(coord_literals(j))
        body.append(compound("occupiedBy", piece, xv(j), yv(j)))
    body.extend(coord_literals(gap))
    body.append(compound("maxIndex", "M"))
    if dx != 0:
        body.append(Struct(">=", (Var("X"), Const(0))))
        body.append(Struct("=<", (Var("X"), Var("M"))))
    if dy != 0:
        body.append(Struct(">=", (Var("Y"), Const(0))))
        body.append(Struct("=<", (Var("Y"), Var("M"))))
    body.append(Not(compound("occupied", "X", "Y")))
    return Clause(compound("winningMove", piece, "X", "Y"), tuple(body))


def winning_move_rules(piece: str) -> list[Clause]:
    """winningMove(piece, X, Y): placing at (X, Y) completes five in a row.

    Twenty rules: four directions times five positions of the empty
    square inside the window, so mid-gap completions are covered too.
    """
    return [_winning_move_rule(piece, dx, dy, gap)
            for dx, dy in _DIRECTIONS
            for gap in range(5)]


def sync_board_facts(kb: KnowledgeBase, board: Board) -> None:
    """Re-mirror the snapshot into occupiedBy/3 facts (row-major order)."""
    kb.clear_facts("occupiedBy", 3)
    for y in range(board.size):
        for x in range(board.size):
            piece = board.cells[y][x]
            if piece is not None:
                kb.add_fact(compound("occupiedBy", piece, x, y))


class GomokuState(KnowledgeState):
    """Belief store for a GoMoku player: board snapshot plus synced facts."""

    def __init__(self, env: GomokuEnvironment, piece: str) -> None:
        super().__init__(env=env)
        self.piece = piece
        self.kb.add_program(support_rules())
        self.kb.add_program(winning_move_rules(CROSS))
        self.kb.add_program(winning_move_rules(CIRCLE))
        self.kb.add_fact(compound("maxIndex", env.board.size - 1))

    def sense(self) -> None:
        super().sense()
        sync_board_facts(self.kb, self.env.board)


# -- actions ----------------------------------------------------------------------


def _my_turn(state: AgentState, piece: str) -> Board | None:
    board = state.env.board
    if board.game_over or board.turn != piece:
        return None
    return board


def _send_move(state: AgentState, piece: str, square: Square):
    agent_id = state.agent.id if state.agent is not None else "anonymous"
    return state.env.send_command(agent_id, "move", (piece, square.x, square.y))


def _move_effect(piece: str, nucleus_k: int, nucleus_window: int):
    def effect(state: AgentState, square: Square):
        result = _send_move(state, piece, square)
        if not result.ok:
            return None  # stale snapshot; nothing to propose this tick
        return assess_move(state.env.board, piece, square, nucleus_k, nucleus_window)

    return effect


def build_dumb_action(piece: str, rng, action_id: str = "dumb",
                      nucleus_k: int = 3, nucleus_window: int = 3) -> Action:
    """Place on a uniformly random empty square."""

    def guard(state: AgentState):
        board = _my_turn(state, piece)
        if board is None:
            return None
        empties = board.empty_squares()
        if not empties:
            return None
        return empties[rng.randrange(len(empties))]

    return Action(action_id, _move_effect(piece, nucleus_k, nucleus_window), guard)


def build_win1_action(piece: str, action_id: str = "win1", declarative: bool = True,
                      nucleus_k: int = 3, nucleus_window: int = 3) -> Action:
    """Take a one-move win when one exists.

    The declarative guard queries winningMove(piece, X, Y) against the
    synced knowledge base; the imperative variant scans alignments
    directly and exists for differential testing.
    """
    goal_literal = compound("winningMove", piece, "X", "Y")

    if declarative:
        def guard(state: AgentState):
            if _my_turn(state, piece) is None:
                return None
            result = state.kb.query(goal_literal)
            if result is None:
                return None
            return Square(result["X"].value, result["Y"].value)
    else:
        def guard(state: AgentState):
            board = _my_turn(state, piece)
            if board is None:
                return None
            wins = immediate_wins(board, piece)
            return wins[0] if wins else None

    return Action(action_id, _move_effect(piece, nucleus_k, nucleus_window), guard)


def build_defend_action(piece: str, action_id: str = "defend", declarative: bool = True,
                        nucleus_k: int = 3, nucleus_window: int = 3) -> Action:
    """Block the opponent's one-move win by taking that square."""
    other = opponent(piece)
    goal_literal = compound("winningMove", other, "X", "Y")

    if declarative:
        def guard(state: AgentState):
            if _my_turn(state, piece) is None:
                return None
            result = state.kb.query(goal_literal)
            if result is None:
                return None
            return Square(result["X"].value, result["Y"].value)
    else:
        def guard(state: AgentState):
            board = _my_turn(state, piece)
            if board is None:
                return None
            threats = immediate_wins(board, other)
            return threats[0] if threats else None

    return Action(action_id, _move_effect(piece, nucleus_k, nucleus_window), guard)


def _adjacent_extension_candidates(board: Board, piece: str) -> list[Square]:
    candidates = []
    for sq in board.empty_squares():
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = sq.x + dx, sq.y + dy
                if board.in_bounds(nx, ny) and board.cells[ny][nx] == piece:
                    candidates.append(sq)
                    break
            else:
                continue
            break
    return candidates


def _placed_run_length(board: Board, piece: str, square: Square) -> int:
    best = 0
    for dx, dy in _DIRECTIONS:
        count = 1
        for sign in (1, -1):
            cx, cy = square.x + sign * dx, square.y + sign * dy
            while board.in_bounds(cx, cy) and board.cells[cy][cx] == piece:
                count += 1
                cx += sign * dx
                cy += sign * dy
        best = max(best, count)
    return best


def build_line_extender_action(piece: str, rng, action_id: str = "extend",
                               nucleus_k: int = 3, nucleus_window: int = 3) -> Action:
    """Grow the longest own line: play adjacent to own pieces, maximizing run length."""

    def guard(state: AgentState):
        board = _my_turn(state, piece)
        if board is None:
            return None
        candidates = _adjacent_extension_candidates(board, piece)
        if not candidates:
            return None
        pool: list[Square] = []
        best = -1
        for sq in candidates:
            score = _placed_run_length(board, piece, sq)
            if score > best:
                best = score
                pool = [sq]
            elif score == best:
                pool.append(sq)
        return pool[rng.randrange(len(pool))]

    return Action(action_id, _move_effect(piece, nucleus_k, nucleus_window), guard)


def build_scatter_action(piece: str, rng, action_id: str = "scatter",
                         nucleus_k: int = 3, nucleus_window: int = 3) -> Action:
    """Fallback when no extension exists: take a center-near empty square."""

    def guard(state: AgentState):
        board = _my_turn(state, piece)
        if board is None:
            return None
        if _adjacent_extension_candidates(board, piece):
            return None  # the extender covers this state
        empties = board.empty_squares()
        if not empties:
            return None
        center = (board.size - 1) / 2
        pool: list[Square] = []
        best = None
        for sq in empties:
            dist = (sq.x - center) ** 2 + (sq.y - center) ** 2
            if best is None or dist < best:
                best = dist
                pool = [sq]
            elif dist == best:
                pool.append(sq)
        return pool[rng.randrange(len(pool))]

    return Action(action_id, _move_effect(piece, nucleus_k, nucleus_window), guard)


# -- tactic and goal structure ---------------------------------------------------------


def build_play_tactic(alpha1: Action, alpha2: Action, piece: str = CROSS,
                      declarative: bool = True) -> Tactic:
    """Priority play: win now, else block, else one of the two fallbacks."""
    return first_of(
        lift(build_win1_action(piece, declarative=declarative)),
        lift(build_defend_action(piece, declarative=declarative)),
        any_of(lift(alpha1), lift(alpha2)),
    )


def build_win_goal(piece: str, tactic: Tactic, name: str = "win") -> Goal:
    return Goal(name, lambda outcome: outcome.win, tactic)


def build_staged_goal(make_tactic: Callable[[], Tactic],
                      repeat_budget: float = UNLIMITED,
                      stage_budget: float = UNLIMITED) -> GoalStructure:
    """Three-stage plan: build a cluster, force a double threat, finish.

    The first two stages sit under a budgeted REPEAT, so a stalled
    attack resets to cluster-building instead of failing the game plan.
    Each stage gets its own tactic instance from ``make_tactic``.
    """
    nucleus = Goal("nucleus", lambda o: o.nucleus, make_tactic())
    attack = Goal("double-threat", lambda o: o.double_threat, make_tactic())
    finish = Goal("finish", lambda o: o.win, make_tactic())
    return goals.seq(
        goals.repeat(
            goals.seq(goals.lift_goal(nucleus, bmax=stage_budget),
                      goals.lift_goal(attack, bmax=stage_budget)),
            bmax=repeat_budget,
        ),
        goals.lift_goal(finish),
    )


# -- players and matches ------------------------------------------------------------------


def make_dumb_player(game: Board, piece: str, seed: int, agent_id: str,
                     budget: float = UNLIMITED) -> Agent:
    env = GomokuEnvironment(game)
    agent = Agent(agent_id, AgentState(env), budget=budget, seed=seed, role="player")
    dumb = build_dumb_action(piece, agent.rng)
    win = build_win_goal(piece, lift(dumb))
    agent.set_goal(goals.lift_goal(win))
    return agent


def make_tactic_player(game: Board, piece: str, seed: int, agent_id: str,
                       budget: float = UNLIMITED, repeat_budget: float = UNLIMITED,
                       declarative: bool = True) -> Agent:
    env = GomokuEnvironment(game)
    state = GomokuState(env, piece)
    agent = Agent(agent_id, state, budget=budget, seed=seed, role="player")

    def make_tactic() -> Tactic:
        return build_play_tactic(
            build_line_extender_action(piece, agent.rng),
            build_scatter_action(piece, agent.rng),
            piece=piece,
            declarative=declarative,
        )

    agent.set_goal(build_staged_goal(make_tactic, repeat_budget=repeat_budget))
    return agent


@dataclass
class MatchResult:
    winner: str | None
    plies: int
    rounds: int
    reports: list[TickReport]
    game: Board

    def trace_lines(self) -> list[str]:
        return [r.trace_line() for r in self.reports]


def play_match(size: int = 8, seed: int = 0, cross_player: str = "tactic",
               circle_player: str = "dumb", max_rounds: int = 10_000,
               budget: float = UNLIMITED, repeat_budget: float = UNLIMITED) -> MatchResult:
    """One deterministic game; cross is ticked first each round."""
    game = Board(size)

    def make(kind: str, piece: str, seed_offset: int, agent_id: str) -> Agent:
        if kind == "tactic":
            return make_tactic_player(game, piece, seed * 2 + seed_offset, agent_id,
                                      budget=budget, repeat_budget=repeat_budget)
        if kind == "dumb":
            return make_dumb_player(game, piece, seed * 2 + seed_offset, agent_id, budget=budget)
        raise ValueError(f"unknown player kind: {kind}")

    cross = make(cross_player, CROSS, 1, "cross-player")
    circle = make(circle_player, CIRCLE, 2, "circle-player")
    harness = RoundRobinHarness([cross, circle], stop_when=lambda: game.game_over)
    report = harness.run(max_rounds)
    return MatchResult(game.winner, game.plies, report.rounds, report.reports, game)
