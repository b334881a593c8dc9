"""Shared helpers for the test suite: fixture loading and a random
well-formed document generator used by the property tests."""

from __future__ import annotations

import random
from pathlib import Path

from gridspec import analyze, evaluate, parse_document
from gridspec.ast import (
    Binary,
    BoundsDecl,
    ConstantPattern,
    ElementRef,
    EquationDecl,
    GuardedVarPattern,
    IndexVar,
    NumberLit,
    SpecDocument,
    TableDecl,
    VarPattern,
)
from gridspec.cli import load_inputs

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / f"{name}.gsx").read_text(encoding="utf-8")


def analyze_fixture(name: str):
    doc = parse_document(fixture_text(name))
    symtab, plan, diagnostics = analyze(doc)
    assert plan is not None, [str(d) for d in diagnostics]
    return doc, symtab, plan


def evaluate_fixture(name: str, inputs_name: str | None = None):
    doc, symtab, plan = analyze_fixture(name)
    inputs = load_inputs(FIXTURES / f"{inputs_name or name}_inputs.csv", symtab)
    values = evaluate(plan, inputs)
    return doc, symtab, plan, inputs, values


# --- random well-formed documents ------------------------------------------

def random_pattern(rng: random.Random, low: int, high: int, var: str):
    kind = rng.randrange(3)
    if kind == 0:
        return ConstantPattern(rng.randint(low, high))
    if kind == 1:
        return VarPattern(var)
    comparator = rng.choice(("<", "<=", ">", ">=", "<>"))
    return GuardedVarPattern(var, comparator, rng.randint(low, high))


def random_document(rng: random.Random, max_dims: int = 2, max_span: int = 6,
                    max_rules: int = 3) -> SpecDocument:
    """A small random document: one or two bounds, an input table, and a
    derived table whose rules may or may not cover its cells."""
    elements = []
    bounds_names = []
    for index in range(rng.randint(1, 2)):
        low = rng.randint(1, 3)
        high = low + rng.randint(0, max_span - 1)
        name = f"b{index}"
        bounds_names.append((name, low, high))
        elements.append(BoundsDecl(name, low, high))

    dims = tuple(rng.choice(bounds_names) for _ in range(rng.randint(1, max_dims)))
    dim_names = tuple(d[0] for d in dims)
    elements.append(TableDecl("src", dim_names, "number"))
    elements.append(TableDecl("out", dim_names, "number"))

    variables = [f"i{k}" for k in range(len(dims))]
    for _ in range(rng.randint(1, max_rules)):
        patterns = tuple(random_pattern(rng, low, high, var)
                         for (name, low, high), var in zip(dims, variables))
        bound = [p.name for p in patterns if not isinstance(p, ConstantPattern)]
        if bound and rng.random() < 0.5:
            ref_indices = tuple(IndexVar(v) if v in bound else NumberLit(dims[k][1])
                                for k, v in enumerate(variables))
            rhs = Binary("+", ElementRef("src", ref_indices), NumberLit(1))
        else:
            rhs = NumberLit(rng.randint(0, 9))
        elements.append(EquationDecl("out", patterns, rhs))
    return SpecDocument(tuple(elements))
