"""Cell-granular evaluation of an elaborated plan.

Runtime values are Blank, Number (optionally tagged as currency),
Boolean, DateValue, or the single NA error.  Arithmetic coerces Blank
to 0; NA propagates through arithmetic and comparison but is absorbed
by isna.  Evaluation walks cells in dependency order, so every read
sees an already-written value.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

from .analyzer import CellId, CellPlan, RuleInstance, eval_index_expr
from .ast import (
    AllIndex,
    Binary,
    BooleanLit,
    Call,
    ElementRef,
    Expr,
    IndexVar,
    NumberLit,
)
from .errors import CyclicDependency, RuntimeFault, UnknownFunction, UnsupportedMatchType

BUILTINS = ("if", "or", "and", "not", "isna", "sum", "match", "date")


class Value:
    __slots__ = ()


class Blank(Value):
    __slots__ = ()

    def __repr__(self):
        return "Blank"

    def __eq__(self, other):
        return isinstance(other, Blank)

    def __hash__(self):
        return hash(Blank)


class NAError(Value):
    __slots__ = ()

    def __repr__(self):
        return "#N/A"

    def __eq__(self, other):
        return isinstance(other, NAError)

    def __hash__(self):
        return hash(NAError)


BLANK = Blank()
NA = NAError()


class Number(Value):
    """A real number; the currency tag is presentation only and is
    ignored by equality, comparison, and arithmetic."""

    __slots__ = ("value", "currency")

    def __init__(self, value: float, currency: bool = False):
        self.value = float(value)
        self.currency = currency

    def __repr__(self):
        return f"Number({self.value}{', currency' if self.currency else ''})"

    def __eq__(self, other):
        return isinstance(other, Number) and self.value == other.value

    def __hash__(self):
        return hash((Number, self.value))


@dataclass(frozen=True)
class Boolean(Value):
    value: bool


@dataclass(frozen=True)
class DateValue(Value):
    """A calendar date; proleptic Gregorian, validated on construction."""

    date: datetime.date

    @classmethod
    def of(cls, year: int, month: int, day: int) -> "DateValue":
        return cls(datetime.date(year, month, day))


class _Fault(Exception):
    """Internal: a builtin or operator rejected its operands.

    evaluate() re-raises this as a RuntimeFault naming the cell."""


def is_na(value: Value) -> bool:
    return value is NA or isinstance(value, NAError)


def value_equal(a: Value, b: Value) -> bool:
    """Type-and-value equality; Blank and NA equal nothing (not even
    themselves) for matching purposes."""
    if isinstance(a, (Blank, NAError)) or isinstance(b, (Blank, NAError)):
        return False
    if isinstance(a, Number) and isinstance(b, Number):
        return a.value == b.value
    if isinstance(a, Boolean) and isinstance(b, Boolean):
        return a.value == b.value
    if isinstance(a, DateValue) and isinstance(b, DateValue):
        return a.date == b.date
    return False


def _as_number(value: Value) -> float:
    if isinstance(value, Number):
        return value.value
    if isinstance(value, Blank):
        return 0.0
    raise _Fault(f"expected a number, got {value!r}")


def _as_boolean(value: Value) -> bool:
    if isinstance(value, Boolean):
        return value.value
    if isinstance(value, Blank):
        return False
    raise _Fault(f"expected a boolean, got {value!r}")


def apply_binary(op: str, left: Value, right: Value) -> Value:
    """Arithmetic and comparison with Blank-as-zero and NA propagation."""
    if is_na(left) or is_na(right):
        return NA
    if op in ("+", "-", "*", "/"):
        a, b = _as_number(left), _as_number(right)
        if op == "+":
            return Number(a + b)
        if op == "-":
            return Number(a - b)
        if op == "*":
            return Number(a * b)
        if b == 0:
            raise _Fault("division by zero")
        return Number(a / b)
    # comparisons; operands must share a type
    if isinstance(left, DateValue) and isinstance(right, DateValue):
        a, b = left.date, right.date
    elif isinstance(left, Boolean) and isinstance(right, Boolean):
        a, b = left.value, right.value
    elif isinstance(left, (Number, Blank)) and isinstance(right, (Number, Blank)):
        a, b = _as_number(left), _as_number(right)
    else:
        raise _Fault(f"cannot compare {left!r} with {right!r}")
    result = {
        "=": a == b, "<>": a != b,
        "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
    }[op]
    return Boolean(result)


def apply_builtin(name: str, args: list) -> Value:
    """Apply a builtin to evaluated arguments.

    Range-valued arguments (from `all` indices) arrive as Python lists
    of Values.  `if` here is the eager form used by the grid verifier;
    eval_expr evaluates `if` lazily before reaching this point.
    """
    name = name.lower()
    if name not in BUILTINS:
        raise UnknownFunction(name)
    if name == "if":
        cond, then, other = args
        if is_na(cond):
            return NA
        return then if _as_boolean(cond) else other
    if name in ("or", "and"):
        if any(is_na(a) for a in args):
            return NA
        flags = [_as_boolean(a) for a in args]
        return Boolean(any(flags) if name == "or" else all(flags))
    if name == "not":
        if is_na(args[0]):
            return NA
        return Boolean(not _as_boolean(args[0]))
    if name == "isna":
        return Boolean(is_na(args[0]))
    if name == "sum":
        total = 0.0
        for item in _flatten(args):
            if is_na(item):
                return NA
            if isinstance(item, (Blank, Boolean)):
                continue
            total += _as_number(item)
        return Number(total)
    if name == "match":
        needle, rng, mode = args
        if not (isinstance(mode, Number) and mode.value == 0):
            raise UnsupportedMatchType("third argument of match must be 0")
        if not isinstance(rng, list):
            rng = [rng]
        if is_na(needle):
            return NA
        for position, item in enumerate(rng, start=1):
            if value_equal(needle, item):
                return Number(position)
        return NA
    if name == "date":
        parts = []
        for part in args:
            if is_na(part):
                return NA
            number = _as_number(part)
            if number != int(number):
                raise _Fault(f"date part {number} is not an integer")
            parts.append(int(number))
        year, month, day = parts
        try:
            return DateValue.of(year, month, day)
        except ValueError as exc:
            raise _Fault(f"invalid date({year}, {month}, {day}): {exc}") from None
    raise AssertionError(name)


def _flatten(args):
    for arg in args:
        if isinstance(arg, list):
            yield from arg
        else:
            yield arg


# --- dependency graph ------------------------------------------------------

@dataclass
class DependencyGraph:
    nodes: list[CellId]
    edges: dict[CellId, set[CellId]]  # cell -> cells its rule reads
    topo_order: list[CellId]


def rule_dependencies(rule: RuleInstance, symtab) -> set[CellId]:
    """The concrete cells a rule's right-hand side reads."""
    deps: set[CellId] = set()
    _collect_refs(rule.equation.rhs, rule.substitution, symtab, deps)
    return deps


def _collect_refs(expr: Expr, subst, symtab, out: set[CellId]):
    if isinstance(expr, ElementRef):
        out.update(expand_ref(expr, subst, symtab))
        return
    if isinstance(expr, Binary):
        _collect_refs(expr.left, subst, symtab, out)
        _collect_refs(expr.right, subst, symtab, out)
    elif isinstance(expr, Call):
        for arg in expr.args:
            _collect_refs(arg, subst, symtab, out)


def expand_ref(ref: ElementRef, subst, symtab) -> list[CellId]:
    """Resolve a reference to concrete cells; `all` spans its dimension.

    Cells are produced in row-major order over the expanded dimensions,
    which is the order aggregate builtins see."""
    decl = symtab.tables[ref.table]
    axes = []
    for index, dim in zip(ref.indices, decl.dims):
        if isinstance(index, AllIndex):
            low, high = symtab.bounds[dim]
            axes.append(range(low, high + 1))
        else:
            axes.append((eval_index_expr(index, subst),))
    cells = [CellId(ref.table, ())]
    for axis in axes:
        cells = [CellId(ref.table, c.indices + (i,)) for c in cells for i in axis]
    return cells


def build_graph(plan: CellPlan) -> DependencyGraph:
    """Build the cell dependency graph and a deterministic topological order."""
    symtab = plan.symtab
    nodes = sorted(set(plan.rules) | plan.inputs, key=lambda c: (c.table, c.indices))
    edges = {cell: set() for cell in nodes}
    for cell, rule in plan.rules.items():
        edges[cell] = rule_dependencies(rule, symtab)

    dependents: dict[CellId, list[CellId]] = {cell: [] for cell in nodes}
    indegree = {}
    for cell in nodes:
        indegree[cell] = len(edges[cell])
        for dep in edges[cell]:
            dependents.setdefault(dep, []).append(cell)

    ready = [cell for cell in nodes if indegree[cell] == 0]
    order: list[CellId] = []
    while ready:
        ready.sort(key=lambda c: (c.table, c.indices), reverse=True)
        cell = ready.pop()
        order.append(cell)
        for dependent in dependents.get(cell, ()):
            indegree[dependent] -= 1
            if indegree[dependent] == 0:
                ready.append(dependent)

    if len(order) != len(nodes):
        raise CyclicDependency(_find_cycle(edges, {c for c in nodes if indegree[c] > 0}))
    return DependencyGraph(nodes, edges, order)


def _find_cycle(edges, remaining):
    """Walk unresolved cells until one repeats; return the cycle path."""
    start = sorted(remaining, key=lambda c: (c.table, c.indices))[0]
    seen = {}
    path = [start]
    cell = start
    while cell not in seen:
        seen[cell] = len(path) - 1
        cell = sorted((d for d in edges[cell] if d in remaining),
                      key=lambda c: (c.table, c.indices))[0]
        path.append(cell)
    return path[seen[cell]:]


# --- evaluation ------------------------------------------------------------

def eval_expr(expr: Expr, env: dict[str, int], store: dict[CellId, Value],
              symtab) -> Value:
    """Evaluate an expression; element references read the store."""
    if isinstance(expr, NumberLit):
        return Number(expr.value)
    if isinstance(expr, BooleanLit):
        return Boolean(expr.value)
    if isinstance(expr, IndexVar):
        return Number(env[expr.name])
    if isinstance(expr, ElementRef):
        cells = expand_ref(expr, env, symtab)
        if len(cells) == 1 and not any(isinstance(i, AllIndex) for i in expr.indices):
            return store[cells[0]]
        raise _Fault(f"range reference to '{expr.table}' outside sum or match")
    if isinstance(expr, Binary):
        left = eval_expr(expr.left, env, store, symtab)
        right = eval_expr(expr.right, env, store, symtab)
        return apply_binary(expr.op, left, right)
    if isinstance(expr, Call):
        name = expr.func.lower()
        if name == "if":
            cond = eval_expr(expr.args[0], env, store, symtab)
            if is_na(cond):
                return NA
            branch = expr.args[1] if _as_boolean(cond) else expr.args[2]
            return eval_expr(branch, env, store, symtab)
        args = []
        for arg in expr.args:
            if (name in ("sum", "match") and isinstance(arg, ElementRef)
                    and any(isinstance(i, AllIndex) for i in arg.indices)):
                args.append([store[c] for c in expand_ref(arg, env, symtab)])
            else:
                args.append(eval_expr(arg, env, store, symtab))
        return apply_builtin(name, args)
    raise TypeError(f"unevaluable expression node: {expr!r}")


def evaluate(plan: CellPlan, inputs: dict[CellId, Value]) -> dict[CellId, Value]:
    """Evaluate every cell of the plan; returns the complete value grid."""
    symtab = plan.symtab
    graph = build_graph(plan)
    store: dict[CellId, Value] = {}
    for cell in graph.topo_order:
        if cell in plan.inputs:
            value = inputs.get(cell, BLANK)
        else:
            rule = plan.rules[cell]
            try:
                value = eval_expr(rule.equation.rhs, rule.substitution, store, symtab)
            except _Fault as exc:
                raise RuntimeFault(cell, str(exc)) from None
            if isinstance(value, Blank):
                # a formula whose result is an empty cell yields 0, as in
                # the host application
                value = Number(0.0)
        if isinstance(value, Number) and symtab.tables[cell.table].result_type == "currency":
            value = Number(value.value, currency=True)
        store[cell] = value
    return store
