"""Differential verification of emitted grids.

Every formula cell is re-evaluated one step: the formula is parsed, the
values document supplies the value at each referenced address, the
result is computed with the evaluator's builtin semantics and compared
to the cell's own entry in the values document.  Numbers compare within
relative tolerance 1e-9; booleans, dates, and NA compare exactly.
"""

from __future__ import annotations

import datetime
import math
import re
from dataclasses import dataclass, field

from .a1 import Address, CellRef, RangeRef, parse_a1_formula
from .ast import Binary, BooleanLit, Call, Expr, NumberLit
from .errors import ParseFailure
from .evaluator import (
    BLANK,
    NA,
    Blank,
    Boolean,
    DateValue,
    Number,
    Value,
    apply_binary,
    apply_builtin,
    is_na,
    _as_boolean,
)
from .layout import Grid

REL_TOLERANCE = 1e-9

_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}$")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?$")


def parse_value_text(text: str) -> Value | None:
    """Parse a values-document cell back into a runtime Value.

    Returns None for caption text, which is not a value."""
    if text == "":
        return BLANK
    if text == "#N/A":
        return NA
    if text == "TRUE":
        return Boolean(True)
    if text == "FALSE":
        return Boolean(False)
    if _DATE_RE.match(text):
        try:
            return DateValue(datetime.date.fromisoformat(text))
        except ValueError:
            return None
    if _NUMBER_RE.match(text):
        return Number(float(text))
    return None


@dataclass
class Mismatch:
    address: Address
    expected: Value  # what one-step evaluation of the formula produces
    actual: Value | None  # what the values document holds

    def __str__(self):
        return f"{self.address}: formula gives {self.expected!r}, document holds {self.actual!r}"


@dataclass
class VerifyReport:
    checks: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _eval_one_step(expr: Expr, lookup) -> Value:
    if isinstance(expr, NumberLit):
        return Number(expr.value)
    if isinstance(expr, BooleanLit):
        return Boolean(expr.value)
    if isinstance(expr, CellRef):
        return lookup(expr.address)
    if isinstance(expr, RangeRef):
        raise ValueError("range outside an aggregate argument")
    if isinstance(expr, Binary):
        return apply_binary(expr.op,
                            _eval_one_step(expr.left, lookup),
                            _eval_one_step(expr.right, lookup))
    if isinstance(expr, Call):
        name = expr.func.lower()
        if name == "if":
            cond = _eval_one_step(expr.args[0], lookup)
            if is_na(cond):
                return NA
            branch = expr.args[1] if _as_boolean(cond) else expr.args[2]
            return _eval_one_step(branch, lookup)
        args = []
        for arg in expr.args:
            if isinstance(arg, RangeRef):
                args.append([lookup(a) for a in arg.addresses()])
            else:
                args.append(_eval_one_step(arg, lookup))
        return apply_builtin(name, args)
    raise TypeError(f"unexpected formula node: {expr!r}")


def values_agree(computed: Value, stored: Value | None) -> bool:
    if stored is None:
        return False
    if isinstance(computed, Number) and isinstance(stored, Number):
        return math.isclose(computed.value, stored.value,
                            rel_tol=REL_TOLERANCE, abs_tol=REL_TOLERANCE)
    if is_na(computed):
        return is_na(stored)
    return type(computed) is type(stored) and computed == stored


def verify_grid(formulas: Grid, values: Grid) -> VerifyReport:
    """One-step check of every formula cell against the values document."""
    report = VerifyReport()

    def lookup(address: Address) -> Value:
        sheet = values.get(address.sheet, {})
        text = sheet.get((address.row, address.column), "")
        value = parse_value_text(text)
        if value is None:
            raise ValueError(f"formula references non-value cell {address}")
        return value

    for sheet in sorted(formulas):
        for (row, column), text in sorted(formulas[sheet].items()):
            if not text.startswith("="):
                continue
            address = Address(sheet, column, row)
            expr = parse_a1_formula(text, default_sheet=sheet)
            computed = _eval_one_step(expr, lookup)
            if isinstance(computed, Blank):
                computed = Number(0.0)  # formulas never yield true blank
            stored = parse_value_text(values.get(sheet, {}).get((row, column), ""))
            report.checks += 1
            if not values_agree(computed, stored):
                report.mismatches.append(Mismatch(address, computed, stored))
    return report


def verify_directory(out_dir) -> VerifyReport:
    """Load an emitted directory (manifest plus per-sheet CSVs) and verify."""
    import json
    from pathlib import Path

    from .layout import csv_to_grid

    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseFailure([]) from exc
    formulas: Grid = {}
    values: Grid = {}
    for sheet in manifest.get("sheets", []):
        formulas[sheet] = csv_to_grid(
            (out / f"{sheet}.formulas.csv").read_text(encoding="utf-8"))
        values[sheet] = csv_to_grid(
            (out / f"{sheet}.values.csv").read_text(encoding="utf-8"))
    return verify_grid(formulas, values)
