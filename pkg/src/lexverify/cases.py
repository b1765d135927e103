"""Bundled case fixtures and small bundle-building helpers."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from .bundle import (
    Constraint,
    ConstraintBundle,
    SOFT,
    VarDecl,
    bundle_from_json,
)
from .exprs import Expr, Sort, Value, format_value, is_decimal_string


def load_fsc_fixture() -> ConstraintBundle:
    """The worked insurer capital-adequacy enforcement case."""
    text = resources.files("lexverify.fixtures").joinpath("fsc_insurance.json").read_text()
    return bundle_from_json(json.loads(text))


def value_expr(value: Value, sort: Sort) -> Expr:
    """Literal expression for a runtime value, at the variable's sort."""
    if sort is Sort.BOOL:
        return Expr.boolean(bool(value))
    if sort is Sort.INT:
        return Expr.integer(int(value))
    f = Fraction(value)
    if f.denominator == 1:
        return Expr.decimal(f"{f.numerator}.0")
    s = format_value(f)
    if is_decimal_string(s):
        return Expr.decimal(s)
    return Expr("/", (Expr.decimal(f"{f.numerator}.0"), Expr.decimal(f"{f.denominator}.0")))


def fact_pin(name: str, value: Value, sort: Sort, *, cid: str | None = None,
             group: str = "", weight: int = 1) -> Constraint:
    """Soft equality constraint asserting a fact value."""
    expr = Expr("=", (Expr.var(name), value_expr(value, sort)))
    return Constraint(id=cid or f"fact_{name}", kind=SOFT, expr=expr,
                      group=group, weight=weight)


def with_fact_pins(bundle: ConstraintBundle, weight: int = 1) -> ConstraintBundle:
    """Append one soft pin per facts{} entry that lacks a matching soft
    equality constraint."""
    sorts = bundle.var_sorts()
    groups = {v.name: v.group for v in bundle.vars}
    existing = set()
    for c in bundle.soft():
        e = c.expr
        if e.op == "=" and e.args[0].op == "var":
            existing.add(e.args[0].value)
    new = list(bundle.constraints)
    for name, value in bundle.facts.items():
        if name in existing:
            continue
        new.append(fact_pin(name, value, sorts[name], group=groups.get(name, ""),
                            weight=weight))
    return bundle.with_constraints(new)


def capital_level_piecewise_expr() -> Expr:
    """The four-level classification over the adequacy ratio r and net worth."""
    from .exprs import parse_expr

    return parse_expr(
        ["ite",
         ["or", ["<", "r", "50.0"], ["<", "net_worth", "0.0"]],
         4,
         ["ite", ["<", "r", "150.0"],
          3,
          ["ite", ["<", "r", "200.0"], 2, 1]]])


def piecewise_level_bundle(r: Value, net_worth: Value) -> ConstraintBundle:
    """Minimal bundle pinning the adequacy ratio and net worth directly, used
    to probe the classification boundaries through the full solver path."""
    vars = (
        VarDecl("r", Sort.REAL, "insurance:capital_level"),
        VarDecl("net_worth", Sort.REAL, "insurance:capital_level"),
        VarDecl("capital_level", Sort.INT, "insurance:capital_level"),
        VarDecl("penalty", Sort.BOOL, "meta:penalty_conditions"),
    )
    level_def = Constraint(
        id="c_capital_level", kind="hard", group="insurance:capital_level",
        expr=Expr("=", (Expr.var("capital_level"), capital_level_piecewise_expr())))
    bundle = ConstraintBundle(
        case_id="piecewise-capital-level",
        vars=vars,
        constraints=(level_def,),
        penalty_var="penalty",
        facts={"r": Fraction(r) if not isinstance(r, bool) else r,
               "net_worth": Fraction(net_worth)},
    )
    return with_fact_pins(bundle)
