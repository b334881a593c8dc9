"""Syntax tree for specification documents.

Node equality is structural: source positions never participate in
comparisons, so a pretty-printed and re-parsed document compares equal
to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourcePos:
    line: int        # 1-based
    column: int      # 1-based
    offset: int      # 0-based byte offset

    def __str__(self):
        return f"{self.line}:{self.column}"


_NOPOS = SourcePos(1, 1, 0)


# --- expressions -----------------------------------------------------------

class Expr:
    """Base class for right-hand-side expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float


@dataclass(frozen=True)
class BooleanLit(Expr):
    value: bool


@dataclass(frozen=True)
class IndexVar(Expr):
    name: str


@dataclass(frozen=True)
class AllIndex(Expr):
    """The `all` marker: a whole-dimension range inside an element reference."""


@dataclass(frozen=True)
class ElementRef(Expr):
    table: str
    indices: tuple[Expr, ...]


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # one of + - * / = <> < <= > >=
    left: Expr
    right: Expr


COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")
ADDITIVE_OPS = ("+", "-")
MULTIPLICATIVE_OPS = ("*", "/")


# --- equation left-hand-side patterns --------------------------------------

@dataclass(frozen=True)
class ConstantPattern:
    value: int


@dataclass(frozen=True)
class VarPattern:
    name: str


@dataclass(frozen=True)
class GuardedVarPattern:
    name: str
    comparator: str  # one of < <= > >= <>
    bound: int


IndexPattern = ConstantPattern | VarPattern | GuardedVarPattern

GUARD_COMPARATORS = ("<", "<=", ">", ">=", "<>")


# --- documentation elements ------------------------------------------------

RESULT_TYPES = ("general", "number", "currency", "date", "boolean")

MAX_ARITY = 3


@dataclass(frozen=True)
class BoundsDecl:
    name: str
    low: int
    high: int
    pos: SourcePos = field(compare=False, default=_NOPOS)


@dataclass(frozen=True)
class TableDecl:
    name: str
    dims: tuple[str, ...]
    result_type: str
    pos: SourcePos = field(compare=False, default=_NOPOS)


@dataclass(frozen=True)
class EquationDecl:
    table: str
    lhs_patterns: tuple[IndexPattern, ...]
    rhs: Expr
    pos: SourcePos = field(compare=False, default=_NOPOS)


Element = BoundsDecl | TableDecl | EquationDecl


@dataclass(frozen=True)
class Comment:
    text: str
    pos: SourcePos = field(compare=False, default=_NOPOS)


@dataclass(frozen=True)
class SpecDocument:
    elements: tuple[Element, ...]
    comments: tuple[Comment, ...] = ()


# --- pretty printing -------------------------------------------------------

_PREC_COMPARISON = 1
_PREC_ADDITIVE = 2
_PREC_MULTIPLICATIVE = 3
_PREC_ATOM = 4

_OP_PREC = {op: _PREC_COMPARISON for op in COMPARISON_OPS}
_OP_PREC.update({op: _PREC_ADDITIVE for op in ADDITIVE_OPS})
_OP_PREC.update({op: _PREC_MULTIPLICATIVE for op in MULTIPLICATIVE_OPS})


def format_number(value: float) -> str:
    """Render a numeric literal, preferring integer form."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def print_expr(expr: Expr) -> str:
    return _print_expr(expr, 0)


def _print_expr(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, NumberLit):
        return format_number(expr.value)
    if isinstance(expr, BooleanLit):
        return "true" if expr.value else "false"
    if isinstance(expr, IndexVar):
        return expr.name
    if isinstance(expr, AllIndex):
        return "all"
    if isinstance(expr, ElementRef):
        if not expr.indices:
            return f"{expr.table}[]"
        inner = ", ".join(_print_expr(i, 0) for i in expr.indices)
        return f"{expr.table}[ {inner} ]"
    if isinstance(expr, Call):
        args = ", ".join(_print_expr(a, 0) for a in expr.args)
        return f"{expr.func}( {args} )"
    if isinstance(expr, Binary):
        prec = _OP_PREC[expr.op]
        # comparison is non-associative; - and / are left-associative
        left = _print_expr(expr.left, prec if expr.op in COMPARISON_OPS else prec - 1)
        right = _print_expr(expr.right, prec)
        text = f"{left} {expr.op} {right}"
        if prec <= parent_prec:
            return f"( {text} )"
        return text
    raise TypeError(f"unprintable expression node: {expr!r}")


def print_pattern(pattern: IndexPattern) -> str:
    if isinstance(pattern, ConstantPattern):
        return str(pattern.value)
    if isinstance(pattern, VarPattern):
        return pattern.name
    return f"{pattern.name}{pattern.comparator}{pattern.bound}"


def print_element(element: Element) -> str:
    if isinstance(element, BoundsDecl):
        return f"bounds {element.name}: {element.low} to {element.high}."
    if isinstance(element, TableDecl):
        dims = " ".join(element.dims)
        dims = f"{dims} " if dims else ""
        return f"table {element.name} : {dims}-> {element.result_type}."
    if isinstance(element, EquationDecl):
        if element.lhs_patterns:
            lhs = ", ".join(print_pattern(p) for p in element.lhs_patterns)
            lhs = f"{element.table}[ {lhs} ]"
        else:
            lhs = f"{element.table}[]"
        return f"{lhs} = {print_expr(element.rhs)}."
    raise TypeError(f"unprintable element: {element!r}")


def pretty_print(doc: SpecDocument) -> str:
    """Render a document to source text that re-parses structurally equal.

    Elements and retained comments are interleaved in source order.
    """
    items: list[tuple[SourcePos, str]] = []
    for element in doc.elements:
        items.append((element.pos, print_element(element)))
    for comment in doc.comments:
        for line in comment.text.splitlines() or [""]:
            items.append((comment.pos, f"-- {line}".rstrip()))
    items.sort(key=lambda item: item[0].offset)
    return "\n".join(text for _, text in items) + "\n"
