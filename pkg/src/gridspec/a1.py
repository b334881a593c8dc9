"""A1 notation: column letters, addresses, and the emitted-formula parser.

The formula grammar mirrors the specification expression grammar with
element references replaced by concrete cell and range leaves, which is
what lets the grid verifier re-evaluate emitted formulas one step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Binary, BooleanLit, Call, Expr, NumberLit
from .errors import ParseFailure
from .parser import Diagnostic
from .ast import SourcePos


def column_letters(number: int) -> str:
    """1-based column number to bijective base-26 letters (1 -> A, 27 -> AA)."""
    if number < 1:
        raise ValueError(f"column number must be >= 1, got {number}")
    letters = ""
    while number:
        number, rem = divmod(number - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def column_number(letters: str) -> int:
    number = 0
    for ch in letters:
        number = number * 26 + (ord(ch.upper()) - ord("A") + 1)
    return number


@dataclass(frozen=True)
class Address:
    sheet: str
    column: int  # 1-based
    row: int     # 1-based

    def a1(self) -> str:
        return f"{column_letters(self.column)}{self.row}"

    def __str__(self):
        return f"{self.sheet}!{self.a1()}"


@dataclass(frozen=True)
class CellRef(Expr):
    address: Address


@dataclass(frozen=True)
class RangeRef(Expr):
    first: Address
    last: Address

    def addresses(self):
        """All covered addresses in row-major order."""
        for row in range(self.first.row, self.last.row + 1):
            for col in range(self.first.column, self.last.column + 1):
                yield Address(self.first.sheet, col, row)


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<ref>(?:(?P<sheet>[A-Za-z_][A-Za-z0-9_]*)!)?\$?(?P<col>[A-Z]+)\$?(?P<row>[1-9][0-9]*))"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>[0-9]+(?:\.[0-9]+)?)"
    r"|(?P<symbol><=|>=|<>|[():,=+\-*/<>])"
    r")")


class _A1Parser:
    def __init__(self, text: str, default_sheet: str):
        self.text = text
        self.default_sheet = default_sheet
        self.tokens = self._lex(text)
        self.pos = 0

    def _lex(self, text):
        tokens = []
        i = 0
        while i < len(text):
            match = _TOKEN_RE.match(text, i)
            if match is None:
                if text[i:].strip():
                    self._error(f"illegal character {text[i]!r}", i)
                break
            # cell references are only refs when not a function call; a
            # name directly followed by '(' is always a call
            if match.lastgroup is None:
                break
            tokens.append(match)
            i = match.end()
        return tokens

    def _error(self, message, offset=0):
        raise ParseFailure([Diagnostic("error", "ParseError", message,
                                       SourcePos(1, offset + 1, offset))])

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _symbol(self, *symbols) -> str | None:
        token = self._peek()
        if token is not None and token.group("symbol") in symbols:
            self.pos += 1
            return token.group("symbol")
        return None

    def _expect_symbol(self, symbol):
        if not self._symbol(symbol):
            self._error(f"expected '{symbol}'")

    def parse(self) -> Expr:
        expr = self.expression()
        if self._peek() is not None:
            self._error("trailing input after formula")
        return expr

    def expression(self) -> Expr:
        left = self.additive()
        op = self._symbol("=", "<>", "<", "<=", ">", ">=")
        if op:
            return Binary(op, left, self.additive())
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while True:
            op = self._symbol("+", "-")
            if not op:
                return left
            left = Binary(op, left, self.multiplicative())

    def multiplicative(self) -> Expr:
        left = self.atom()
        while True:
            op = self._symbol("*", "/")
            if not op:
                return left
            left = Binary(op, left, self.atom())

    def atom(self) -> Expr:
        token = self._peek()
        if token is None:
            self._error("unexpected end of formula")
        if token.group("number"):
            self.pos += 1
            return NumberLit(float(token.group("number")))
        if token.group("symbol") == "(":
            self.pos += 1
            inner = self.expression()
            self._expect_symbol(")")
            return inner
        if token.group("ref"):
            self.pos += 1
            first = self._address(token)
            if self._symbol(":"):
                last_token = self._peek()
                if last_token is None or not last_token.group("ref"):
                    self._error("expected a cell reference after ':'")
                self.pos += 1
                return RangeRef(first, self._address(last_token, first.sheet))
            return CellRef(first)
        if token.group("name"):
            name = token.group("name")
            self.pos += 1
            if name.upper() == "TRUE":
                return BooleanLit(True)
            if name.upper() == "FALSE":
                return BooleanLit(False)
            self._expect_symbol("(")
            args = []
            if not self._symbol(")"):
                args.append(self.expression())
                while self._symbol(","):
                    args.append(self.expression())
                self._expect_symbol(")")
            return Call(name, tuple(args))
        self._error(f"unexpected token {token.group(0).strip()!r}")

    def _address(self, token, default_sheet=None) -> Address:
        sheet = token.group("sheet") or default_sheet or self.default_sheet
        return Address(sheet, column_number(token.group("col")),
                       int(token.group("row")))


def parse_a1_formula(text: str, default_sheet: str = "Model") -> Expr:
    """Parse a formula beginning with '=' into an expression whose leaves
    are CellRef and RangeRef addresses."""
    if not text.startswith("="):
        raise ParseFailure([Diagnostic(
            "error", "ParseError", "formula must begin with '='", SourcePos(1, 1, 0))])
    return _A1Parser(text[1:], default_sheet).parse()
