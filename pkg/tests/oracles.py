"""Independent reference implementations the tests compare against.

Each oracle deliberately uses a different formulation than the
production code:

  * tactic selection: a bottom-up enabledness table plus a per-leaf
    path filter, instead of the recursive definition;
  * next-tactic: an iterative parent-chain walk;
  * five-in-a-row: precomputed windows and place-and-check probing,
    instead of directional run counting;
  * goal/budget runs: a recursive functional evaluator with its own
    budget arithmetic, instead of the tick loop;
  * logic queries: forward-chaining saturation to a ground model.
"""

from __future__ import annotations

import itertools

from tactical_agents.gomoku import Board, Square
from tactical_agents.logic import Const, Not, Struct, Var
from tactical_agents.tactic import Tactic, TacticKind

# -- tactic selection ---------------------------------------------------------------


def enabledness_table(root: Tactic, state: dict) -> dict:
    """Bottom-up: which subtrees have any eligible starting action."""
    table: dict[int, bool] = {}

    def fill(node: Tactic) -> bool:
        if node.kind is TacticKind.PRIMITIVE:
            value = state.get(node.action.id) is not None
        elif node.kind is TacticKind.SEQ:
            value = fill(node.children[0])
            for child in node.children[1:]:
                fill(child)
        else:
            value = False
            for child in node.children:
                value = fill(child) or value
        table[id(node)] = value
        return value

    fill(root)
    return table


def oracle_first(root: Tactic, state: dict) -> list:
    """Per-leaf check: a leaf starts the tactic iff it is enabled and
    every edge on its root path admits it (SEQ: leftmost child only;
    FIRSTOF: no enabled earlier sibling)."""
    table = enabledness_table(root, state)
    result = []
    for leaf in root.leaves():
        if not table[id(leaf)]:
            continue
        admitted = True
        node = leaf
        while node is not root:
            parent = node.parent
            index = node.child_index
            if parent.kind is TacticKind.SEQ and index != 0:
                admitted = False
                break
            if parent.kind is TacticKind.FIRSTOF and any(
                    table[id(parent.children[j])] for j in range(index)):
                admitted = False
                break
            node = parent
        if admitted:
            result.append(leaf.action)
    return result


def oracle_next(node: Tactic) -> Tactic:
    """Iterative walk up the parent chain."""
    current = node
    while current.parent is not None:
        parent = current.parent
        if parent.kind is TacticKind.SEQ and current.child_index < len(parent.children) - 1:
            return parent.children[current.child_index + 1]
        current = parent
    return current


# -- five in a row -----------------------------------------------------------------


_through_cache: dict[int, dict[Square, list[tuple[Square, ...]]]] = {}


def _windows_through(size: int) -> dict[Square, list[tuple[Square, ...]]]:
    cached = _through_cache.get(size)
    if cached is not None:
        return cached
    through: dict[Square, list[tuple[Square, ...]]] = {
        Square(x, y): [] for x in range(size) for y in range(size)
    }
    for x, y, (dx, dy) in itertools.product(
            range(size), range(size), ((1, 0), (0, 1), (1, 1), (1, -1))):
        end_x, end_y = x + 4 * dx, y + 4 * dy
        if not (0 <= end_x < size and 0 <= end_y < size):
            continue
        window = tuple(Square(x + i * dx, y + i * dy) for i in range(5))
        for sq in window:
            through[sq].append(window)
    _through_cache[size] = through
    return through


def oracle_has_five(board: Board, piece: str) -> bool:
    through = _windows_through(board.size)
    seen = set()
    for sq, windows in through.items():
        for window in windows:
            if id(window) in seen:
                continue
            seen.add(id(window))
            if all(board.cells[y][x] == piece for x, y in window):
                return True
    return False


def oracle_winning_squares(board: Board, piece: str) -> list[Square]:
    """Place-and-check probing of every empty square."""
    through = _windows_through(board.size)
    cells = board.cells
    wins = []
    for sq in board.empty_squares():
        cells[sq.y][sq.x] = piece
        if any(all(cells[y][x] == piece for x, y in window) for window in through[sq]):
            wins.append(sq)
        cells[sq.y][sq.x] = None
    return wins


# -- goal/budget reference evaluator -------------------------------------------------
#
# Goal trees are described by nested specs:
#   ("goal", name, attempts_needed_or_None, bmax)
#   ("seq", [children], bmax)
#   ("firstof", [children], bmax)
#   ("repeat", child, bmax)
#
# A leaf attempt costs 1; the leaf solves on its attempts_needed-th
# attempt (None: never).  Budget checks happen before an attempt, so a
# goal fails without cost once its allocation is used up.


def spec_paths(spec, path=()):
    yield path, spec
    kind = spec[0]
    if kind in ("seq", "firstof"):
        for i, child in enumerate(spec[1]):
            yield from spec_paths(child, path + (i,))
    elif kind == "repeat":
        yield from spec_paths(spec[1], path + (0,))


def reference_goal_run(spec, beta0: float):
    """Returns (attempt trace, {path: final status name}, total consumed)."""
    trace: list[str] = []
    statuses: dict[tuple, str] = {}
    attempts: dict[str, int] = {}

    def run(node, path, available):
        kind = node[0]
        bmax = node[-1]
        allocated = min(bmax, available)
        statuses[path] = "INPROGRESS"
        spent = 0
        if kind == "goal":
            _, name, needed, _ = node
            while True:
                if not (allocated - spent > 0):
                    statuses[path] = "FAILED"
                    return "FAILED", spent
                attempts[name] = attempts.get(name, 0) + 1
                trace.append(name)
                spent += 1
                if needed is not None and attempts[name] >= needed:
                    statuses[path] = "SOLVED"
                    return "SOLVED", spent
        if kind == "seq":
            for i, child in enumerate(node[1]):
                status, used = run(child, path + (i,), allocated - spent)
                spent += used
                if status == "FAILED":
                    statuses[path] = "FAILED"
                    return "FAILED", spent
            statuses[path] = "SOLVED"
            return "SOLVED", spent
        if kind == "firstof":
            for i, child in enumerate(node[1]):
                status, used = run(child, path + (i,), allocated - spent)
                spent += used
                if status == "SOLVED":
                    statuses[path] = "SOLVED"
                    return "SOLVED", spent
            statuses[path] = "FAILED"
            return "FAILED", spent
        if kind == "repeat":
            child = node[1]
            while True:
                status, used = run(child, path + (0,), allocated - spent)
                spent += used
                if status == "SOLVED":
                    statuses[path] = "SOLVED"
                    return "SOLVED", spent
                if allocated - spent > 0:
                    # retry: the child subtree starts over
                    for sub_path, _ in spec_paths(child, path + (0,)):
                        statuses.pop(sub_path, None)
                    continue
                statuses[path] = "FAILED"
                return "FAILED", spent
        raise AssertionError(f"unknown spec kind {kind!r}")

    root_status, consumed = run(spec, (), beta0)
    return trace, statuses, consumed


# -- forward-chaining logic oracle ------------------------------------------------------


def _match(pattern, atom, bindings):
    """Match a (possibly variable-carrying) literal against a ground atom."""
    if isinstance(pattern, Const):
        return bindings if pattern == atom else None
    if isinstance(pattern, Var):
        bound = bindings.get(pattern)
        if bound is None:
            out = dict(bindings)
            out[pattern] = atom
            return out
        return bindings if bound == atom else None
    if isinstance(pattern, Struct) and isinstance(atom, Struct):
        if pattern.functor != atom.functor or len(pattern.args) != len(atom.args):
            return None
        for p, a in zip(pattern.args, atom.args):
            bindings = _match(p, a, bindings)
            if bindings is None:
                return None
        return bindings
    return None


def _substitute(literal, bindings):
    if isinstance(literal, Var):
        return bindings.get(literal, literal)
    if isinstance(literal, Struct) and literal.args:
        return Struct(literal.functor, tuple(_substitute(a, bindings) for a in literal.args))
    return literal


def forward_chain(facts, rules):
    """Saturate to the ground model.  Rules must be stratified: any
    negated predicate is fully derivable from facts and earlier rules
    (guaranteed by the hierarchical generator)."""
    model = set(facts)
    changed = True
    while changed:
        changed = False
        for clause in rules:
            positives = [lit for lit in clause.body if isinstance(lit, Struct)]
            negatives = [lit.literal for lit in clause.body if isinstance(lit, Not)]

            def expand(literals, bindings):
                if not literals:
                    for negated in negatives:
                        ground = _substitute(negated, bindings)
                        if ground in model:
                            return
                    head = _substitute(clause.head, bindings)
                    if head not in model:
                        model.add(head)
                        nonlocal changed
                        changed = True
                    return
                first, rest = literals[0], literals[1:]
                for atom in list(model):
                    extended = _match(first, atom, bindings)
                    if extended is not None:
                        expand(rest, extended)

            expand(positives, {})
    return model


def oracle_query_success(model, goal) -> bool:
    return any(_match(goal, atom, {}) is not None for atom in model)
