"""A small Horn-clause engine: the declarative backend for action guards.

Facts and rules go into a KnowledgeBase; queries are answered by
depth-first SLD resolution with leftmost literal selection and clauses
tried in the order they were written.  The engine returns the first
solution only, matching the guard contract of producing one witness.

Supported beyond plain Horn clauses:

  * negation as failure on ground literals (``not p(a, 1)`` holds iff
    p(a, 1) has no derivation); a negation reached while still
    containing variables is a rule-ordering bug and raises QueryError;
  * integer arithmetic: ``X is E`` evaluates E (constants, bound
    variables, + and -) and binds or checks X; comparisons <, =<, >, >=
    require both sides ground.

Resolution is capped (default 10,000 steps) so runaway recursion
surfaces as a QueryError instead of a hang.  Queries never mutate the
knowledge base.

Terms are immutable: Var / Const / Struct.  The builders ``var``,
``atom``, and ``compound`` accept plain Python values; strings starting
with an uppercase letter or underscore become variables, everything
else a constant.  A textual clause syntax (one clause per line,
``head :- lit1, lit2, not lit3, X is A - 1.``) is provided for test
fixtures via ``parse_program``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Any, Iterator, Union

from .runtime import AgentState


class LogicError(Exception):
    """Malformed terms, clauses, or knowledge-base usage."""


class QueryError(LogicError):
    """A query that cannot be evaluated soundly (or ran past the step cap)."""


# -- terms ------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise LogicError("variable names must be nonempty")

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Union[str, int]

    def __repr__(self) -> str:
        return repr(self.value) if isinstance(self.value, str) else str(self.value)


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(repr, self.args))})"


Term = Union[Var, Const, Struct]


@dataclass(frozen=True)
class Not:
    """Negation-as-failure literal; only legal inside clause bodies."""

    literal: Struct

    def __repr__(self) -> str:
        return f"not {self.literal!r}"


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple = ()

    def __repr__(self) -> str:
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}."


_COMPARISONS = {"<", "=<", ">", ">="}
_BUILTINS = _COMPARISONS | {"is"}


def _coerce(value: Any) -> Term:
    if isinstance(value, (Var, Const, Struct)):
        return value
    if isinstance(value, bool):
        raise LogicError("booleans are not terms")
    if isinstance(value, int):
        return Const(value)
    if isinstance(value, str):
        if value and (value[0].isupper() or value[0] == "_"):
            return Var(value)
        return Const(value)
    raise LogicError(f"cannot make a term from {value!r}")


def var(name: str) -> Var:
    return Var(name)


def atom(value: Union[str, int]) -> Const:
    return Const(value)


def compound(functor: str, *args: Any) -> Struct:
    return Struct(functor, tuple(_coerce(a) for a in args))


def rule(head: Struct, *body: Any) -> Clause:
    """Build a clause; body entries may be Struct or Not literals."""
    literals = []
    for lit in body:
        if not isinstance(lit, (Struct, Not)):
            raise LogicError(f"body literal must be a compound or negation, got {lit!r}")
        literals.append(lit)
    if not isinstance(head, Struct):
        raise LogicError("clause heads must be compound terms")
    if head.functor in _BUILTINS:
        raise LogicError(f"cannot define clauses for builtin {head.functor!r}")
    return Clause(head, tuple(literals))


def negate(literal: Struct) -> Not:
    return Not(literal)


# -- substitution and unification --------------------------------------------------


def walk(term: Term, subst: dict) -> Term:
    while isinstance(term, Var) and term in subst:
        term = subst[term]
    return term


def resolve(term: Term, subst: dict) -> Term:
    """Apply a substitution all the way down."""
    term = walk(term, subst)
    if isinstance(term, Struct) and term.args:
        return Struct(term.functor, tuple(resolve(a, subst) for a in term.args))
    return term


def is_ground(term: Term) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Struct):
        return all(is_ground(a) for a in term.args)
    return True


def _occurs(v: Var, term: Term, subst: dict) -> bool:
    term = walk(term, subst)
    if isinstance(term, Var):
        return term == v
    if isinstance(term, Struct):
        return any(_occurs(v, a, subst) for a in term.args)
    return False


def unify(t1: Term, t2: Term, bindings: dict | None = None) -> dict | None:
    """Most general unifier extending ``bindings``, or None.

    Performs the occurs check, so cyclic bindings are rejected.  The
    input dict is never mutated; a successful unification returns a new
    (or the same, if nothing was added) mapping.
    """
    subst = bindings if bindings is not None else {}
    a = walk(t1, subst)
    b = walk(t2, subst)
    if a == b:
        return subst
    if isinstance(a, Var):
        if _occurs(a, b, subst):
            return None
        out = dict(subst)
        out[a] = b
        return out
    if isinstance(b, Var):
        if _occurs(b, a, subst):
            return None
        out = dict(subst)
        out[b] = a
        return out
    if isinstance(a, Struct) and isinstance(b, Struct):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            subst = unify(x, y, subst)
            if subst is None:
                return None
        return subst
    return None


def collect_vars(term: Term) -> list[Var]:
    found: list[Var] = []

    def go(t: Term) -> None:
        if isinstance(t, Var):
            if t not in found:
                found.append(t)
        elif isinstance(t, Struct):
            for a in t.args:
                go(a)

    go(term)
    return found


# -- the knowledge base ----------------------------------------------------------------


class KnowledgeBase:
    """Ordered store of facts and rules, with first-solution queries."""

    def __init__(self, step_limit: int = 10_000) -> None:
        self.step_limit = step_limit
        # per (functor, arity): ordered ("fact", Struct) / ("rule", Clause)
        self._entries: dict[tuple[str, int], list[tuple[str, Any]]] = {}
        self._ground: dict[tuple[str, int], set[Struct]] = {}
        self._rename = itertools.count(1)

    def add_fact(self, fact: Struct) -> None:
        if not isinstance(fact, Struct):
            raise LogicError("facts must be compound terms")
        if not is_ground(fact):
            raise LogicError(f"facts must be ground: {fact!r}")
        key = (fact.functor, len(fact.args))
        self._entries.setdefault(key, []).append(("fact", fact))
        self._ground.setdefault(key, set()).add(fact)

    def add_rule(self, clause: Clause) -> None:
        if not isinstance(clause, Clause):
            raise LogicError("add_rule takes a Clause")
        if not clause.body:
            self.add_fact(clause.head)
            return
        key = (clause.head.functor, len(clause.head.args))
        self._entries.setdefault(key, []).append(("rule", clause))

    def add_program(self, clauses) -> None:
        for clause in clauses:
            self.add_rule(clause)

    def clear_facts(self, functor: str, arity: int) -> None:
        """Drop all facts of one predicate (used to re-sync dynamic facts)."""
        key = (functor, arity)
        entries = self._entries.get(key)
        if entries is not None:
            entries[:] = [e for e in entries if e[0] != "fact"]
        self._ground.pop(key, None)

    def fact_count(self, functor: str, arity: int) -> int:
        return sum(1 for kind, _ in self._entries.get((functor, arity), ()) if kind == "fact")

    def rule_count(self, functor: str, arity: int) -> int:
        return sum(1 for kind, _ in self._entries.get((functor, arity), ()) if kind == "rule")

    # -- resolution -----------------------------------------------------------------

    def query(self, goal: Struct, step_limit: int | None = None) -> dict[str, Term] | None:
        """First solution of ``goal`` as {variable name: ground term}, or None."""
        if not isinstance(goal, Struct):
            raise LogicError("queries must be compound terms")
        steps = [0, step_limit if step_limit is not None else self.step_limit]
        for subst in self._solve((goal,), {}, steps):
            out: dict[str, Term] = {}
            for v in collect_vars(goal):
                value = resolve(v, subst)
                if is_ground(value):
                    out[v.name] = value
            return out
        return None

    def ask(self, goal: Struct) -> bool:
        return self.query(goal) is not None

    def _step(self, steps: list[int]) -> None:
        steps[0] += 1
        if steps[0] > steps[1]:
            raise QueryError(f"resolution step limit exceeded ({steps[1]})")

    def _rename_clause(self, clause: Clause) -> Clause:
        mapping: dict[Var, Var] = {}
        suffix = next(self._rename)

        def rn(term):
            if isinstance(term, Var):
                fresh = mapping.get(term)
                if fresh is None:
                    fresh = Var(f"{term.name}~{suffix}")
                    mapping[term] = fresh
                return fresh
            if isinstance(term, Struct) and term.args:
                return Struct(term.functor, tuple(rn(a) for a in term.args))
            if isinstance(term, Not):
                return Not(rn(term.literal))
            return term

        return Clause(rn(clause.head), tuple(rn(lit) for lit in clause.body))

    def _solve(self, goals: tuple, subst: dict, steps: list[int]) -> Iterator[dict]:
        if not goals:
            yield subst
            return
        literal, rest = goals[0], goals[1:]

        if isinstance(literal, Not):
            inner = resolve(literal.literal, subst)
            if not is_ground(inner):
                raise QueryError(f"negation on non-ground literal: {inner!r}")
            self._step(steps)
            for _ in self._solve((inner,), {}, steps):
                return  # provable, so the negation fails
            yield from self._solve(rest, subst, steps)
            return

        if literal.functor in _BUILTINS and len(literal.args) == 2:
            self._step(steps)
            result = self._eval_builtin(literal, subst)
            if result is not None:
                yield from self._solve(rest, result, steps)
            return

        goal = resolve(literal, subst)
        key = (goal.functor, len(goal.args))
        entries = self._entries.get(key, ())
        if is_ground(goal):
            # a ground goal matched by a stored fact needs no other proof:
            # any alternative derivation would add no bindings
            if goal in self._ground.get(key, ()):
                self._step(steps)
                yield from self._solve(rest, subst, steps)
                return
            for kind, entry in entries:
                if kind != "rule":
                    continue
                self._step(steps)
                renamed = self._rename_clause(entry)
                extended = unify(goal, renamed.head, subst)
                if extended is not None:
                    yield from self._solve(renamed.body + rest, extended, steps)
            return
        first_arg = goal.args[0] if goal.args else None
        first_is_const = isinstance(first_arg, Const)
        for kind, entry in entries:
            if kind == "fact":
                # facts are ground, so a constant first argument filters cheaply
                if first_is_const and entry.args and entry.args[0] != first_arg:
                    continue
                self._step(steps)
                extended = unify(goal, entry, subst)
                if extended is not None:
                    yield from self._solve(rest, extended, steps)
            else:
                self._step(steps)
                renamed = self._rename_clause(entry)
                extended = unify(goal, renamed.head, subst)
                if extended is not None:
                    yield from self._solve(renamed.body + rest, extended, steps)

    def _eval_builtin(self, literal: Struct, subst: dict) -> dict | None:
        op = literal.functor
        lhs, rhs = literal.args
        if op == "is":
            value = Const(self._eval_arith(rhs, subst))
            left = walk(lhs, subst)
            if isinstance(left, Var):
                out = dict(subst)
                out[left] = value
                return out
            return subst if left == value else None
        a = self._eval_arith(lhs, subst)
        b = self._eval_arith(rhs, subst)
        ok = {"<": a < b, "=<": a <= b, ">": a > b, ">=": a >= b}[op]
        return subst if ok else None

    def _eval_arith(self, term: Term, subst: dict) -> int:
        term = walk(term, subst)
        if isinstance(term, Const):
            if not isinstance(term.value, int):
                raise QueryError(f"arithmetic on non-integer {term!r}")
            return term.value
        if isinstance(term, Struct) and term.functor in {"+", "-"} and len(term.args) == 2:
            a = self._eval_arith(term.args[0], subst)
            b = self._eval_arith(term.args[1], subst)
            return a + b if term.functor == "+" else a - b
        if isinstance(term, Var):
            raise QueryError(f"arithmetic on unbound variable {term!r} (rule ordering bug)")
        raise QueryError(f"cannot evaluate {term!r} arithmetically")


# -- textual clause syntax (test fixtures) ------------------------------------------------


_TOKEN = re.compile(r"\s*(?::-|=<|>=|[()+\-,.<>]|[A-Za-z_][A-Za-z0-9_]*|\d+|%[^\n]*)")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            if text[pos:].strip():
                raise LogicError(f"cannot tokenize near {text[pos:pos + 20]!r}")
            break
        tok = match.group().strip()
        pos = match.end()
        if tok and not tok.startswith("%"):
            tokens.append(tok)
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise LogicError("unexpected end of clause")
        if expected is not None and tok != expected:
            raise LogicError(f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def parse_clause(self) -> Clause:
        head = self.parse_literal()
        if not isinstance(head, Struct) or head.functor in _BUILTINS:
            raise LogicError(f"invalid clause head: {head!r}")
        body: list = []
        if self.peek() == ":-":
            self.take()
            body.append(self.parse_literal())
            while self.peek() == ",":
                self.take()
                body.append(self.parse_literal())
        self.take(".")
        return Clause(head, tuple(body))

    def parse_literal(self):
        if self.peek() == "not":
            self.take()
            inner = self.parse_literal()
            if not isinstance(inner, Struct):
                raise LogicError("negation applies to compound literals")
            return Not(inner)
        left = self.parse_expr()
        op = self.peek()
        if op in _BUILTINS:
            self.take()
            right = self.parse_expr()
            return Struct(op, (left, right))
        if not isinstance(left, Struct):
            raise LogicError(f"expected a literal, got {left!r}")
        return left

    def parse_expr(self) -> Term:
        term = self.parse_primary()
        while self.peek() in {"+", "-"}:
            op = self.take()
            term = Struct(op, (term, self.parse_primary()))
        return term

    def parse_primary(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise LogicError("unexpected end of expression")
        if tok == "-":
            self.take()
            value = self.take()
            if not value.isdigit():
                raise LogicError(f"expected an integer after '-', got {value!r}")
            return Const(-int(value))
        if tok.isdigit():
            self.take()
            return Const(int(tok))
        name = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise LogicError(f"unexpected token {name!r}")
        if name[0].isupper() or name[0] == "_":
            return Var(name)
        if self.peek() == "(":
            self.take()
            args = [self.parse_expr()]
            while self.peek() == ",":
                self.take()
                args.append(self.parse_expr())
            self.take(")")
            return Struct(name, tuple(args))
        return Const(name)


def parse_clause(source: str) -> Clause:
    parser = _Parser(_tokenize(source))
    clause = parser.parse_clause()
    if parser.peek() is not None:
        raise LogicError(f"trailing tokens after clause: {parser.peek()!r}")
    return clause


def parse_program(source: str) -> list[Clause]:
    """Parse one clause per '.'-terminated statement; '%' starts a comment."""
    parser = _Parser(_tokenize(source))
    clauses = []
    while parser.peek() is not None:
        clauses.append(parser.parse_clause())
    return clauses


def parse_literal(source: str):
    """Parse a single body-style literal (handy for queries in tests)."""
    parser = _Parser(_tokenize(source))
    literal = parser.parse_literal()
    if parser.peek() == ".":
        parser.take()
    if parser.peek() is not None:
        raise LogicError(f"trailing tokens after literal: {parser.peek()!r}")
    return literal


# -- agent-state integration -----------------------------------------------------------


class KnowledgeState(AgentState):
    """Agent state with an embedded knowledge base for declarative guards.

    Subclasses override ``sense`` to re-sync dynamic facts from the
    environment snapshot each tick.
    """

    def __init__(self, env=None, kb: KnowledgeBase | None = None) -> None:
        super().__init__(env)
        self.kb = kb if kb is not None else KnowledgeBase()

    def query(self, goal: Struct) -> dict[str, Term] | None:
        return self.kb.query(goal)
