"""Case bundles: variable declarations, hard law constraints, weighted soft facts.

A bundle is the unit every downstream stage consumes — validation here is the
single gate; once `validate_bundle` returns no errors, the compiler, solver
driver, verification checks and optimizer all accept the bundle without
further defensive checks.

On-disk / wire format (JSON)::

    {
      "case_id": "...",
      "vars": [{"name": "...", "sort": "bool|int|real", "group": "..."}],
      "constraints": [{"id": "...", "kind": "hard|soft", "group": "...",
                       "weight": 1, "expr": [...]}],
      "penalty_var": "penalty",
      "facts": {"name": value},
      "meta": {"key": "value"}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .exprs import (
    COMPARISONS,
    Expr,
    Sort,
    SortError,
    Value,
    expr_to_json,
    infer_sort,
    is_identifier,
    parse_expr,
    value_from_json,
    value_to_json,
)

HARD = "hard"
SOFT = "soft"

Assignment = dict[str, Value]


@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: Sort
    group: str = ""


@dataclass(frozen=True)
class Constraint:
    id: str
    kind: str  # HARD | SOFT
    expr: Expr
    group: str = ""
    weight: int | None = None  # present iff SOFT
    description: str = ""  # optional trace template, "{var}", "{old}", "{new}"


@dataclass(frozen=True)
class ConstraintBundle:
    case_id: str
    vars: tuple[VarDecl, ...]
    constraints: tuple[Constraint, ...]
    penalty_var: str
    facts: Mapping[str, Value] = field(default_factory=dict)
    meta: Mapping[str, str] = field(default_factory=dict)

    def var_sorts(self) -> dict[str, Sort]:
        return {v.name: v.sort for v in self.vars}

    def var_map(self) -> dict[str, VarDecl]:
        return {v.name: v for v in self.vars}

    def hard(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.kind == HARD)

    def soft(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.kind == SOFT)

    def constraint(self, cid: str) -> Constraint:
        for c in self.constraints:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_constraints(self, constraints: Iterable[Constraint]) -> "ConstraintBundle":
        return replace(self, constraints=tuple(constraints))

    def with_vars(self, vars: Iterable[VarDecl]) -> "ConstraintBundle":
        return replace(self, vars=tuple(vars))

    def with_facts(self, facts: Mapping[str, Value]) -> "ConstraintBundle":
        return replace(self, facts=dict(facts))


@dataclass(frozen=True)
class ValidationError:
    code: str
    message: str
    where: str = ""

    def __str__(self):
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}: {self.message}{loc}"


def validate_bundle(bundle: ConstraintBundle) -> list[ValidationError]:
    """Every invariant violation in the bundle; empty list means valid."""
    errors: list[ValidationError] = []

    seen_vars: set[str] = set()
    for v in bundle.vars:
        if not is_identifier(v.name):
            errors.append(ValidationError("BadIdentifier", f"bad variable name {v.name!r}", v.name))
        if v.name in seen_vars:
            errors.append(ValidationError("DuplicateVariable", f"variable {v.name!r} declared twice", v.name))
        seen_vars.add(v.name)

    sorts = bundle.var_sorts()

    seen_ids: set[str] = set()
    hard_count = 0
    for c in bundle.constraints:
        if c.id in seen_ids:
            errors.append(ValidationError("DuplicateId", f"constraint id {c.id!r} reused", c.id))
        seen_ids.add(c.id)

        if c.kind == HARD:
            hard_count += 1
            if c.weight is not None:
                errors.append(ValidationError("WeightOnHard", f"hard constraint {c.id!r} carries a weight", c.id))
        elif c.kind == SOFT:
            w = 1 if c.weight is None else c.weight
            if not isinstance(w, int) or w < 1:
                errors.append(ValidationError("NonpositiveWeight", f"soft constraint {c.id!r} needs integer weight >= 1, got {c.weight!r}", c.id))
        else:
            errors.append(ValidationError("BadKind", f"constraint {c.id!r} has kind {c.kind!r}", c.id))

        for name in c.expr.variables():
            if name not in sorts:
                errors.append(ValidationError("UnknownVariable", f"constraint {c.id!r} references undeclared variable {name!r}", c.id))

        try:
            s = infer_sort(c.expr, sorts)
            if s is not Sort.BOOL:
                errors.append(ValidationError("NonBooleanConstraint", f"constraint {c.id!r} has sort {s.value}, expected bool", c.id))
        except SortError as exc:
            # unknown-variable errors were already reported above
            if "unknown variable" not in str(exc):
                errors.append(ValidationError("SortMismatch", f"constraint {c.id!r}: {exc}", c.id))

        errors.extend(_check_linear(c.expr, c.id))

    if hard_count == 0:
        errors.append(ValidationError("NoHardConstraints", "bundle carries no hard (law) constraints"))

    if not bundle.penalty_var:
        errors.append(ValidationError("MissingPenaltyVar", "penalty_var not named"))
    elif bundle.penalty_var not in sorts:
        errors.append(ValidationError("MissingPenaltyVar", f"penalty_var {bundle.penalty_var!r} not declared"))
    elif sorts[bundle.penalty_var] is Sort.REAL:
        errors.append(ValidationError("BadPenaltySort", f"penalty_var {bundle.penalty_var!r} must be BOOL or 0/1 INT, is real"))

    for name, value in bundle.facts.items():
        if name not in sorts:
            errors.append(ValidationError("UnknownVariable", f"fact for undeclared variable {name!r}", name))
            continue
        if not _value_matches_sort(value, sorts[name]):
            errors.append(ValidationError("SortMismatch", f"fact {name!r}={value!r} does not match declared sort {sorts[name].value}", name))

    return errors


def _value_matches_sort(value: Value, sort: Sort) -> bool:
    if sort is Sort.BOOL:
        return isinstance(value, bool)
    if sort is Sort.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _check_linear(e: Expr, cid: str) -> list[ValidationError]:
    """Multiplication needs a literal factor, division a nonzero literal denominator.

    Keeps every emitted formula inside linear arithmetic, the decidable/fast
    fragment all SMT-LIB 2 backends handle uniformly.
    """
    errors = []
    for node in e.walk():
        if node.op == "*":
            a, b = node.args
            if not (a.is_literal() or b.is_literal()):
                errors.append(ValidationError(
                    "NonlinearTerm", f"constraint {cid!r}: product of two non-literal terms", cid))
        elif node.op == "/":
            den = node.args[1]
            if not den.is_literal():
                errors.append(ValidationError(
                    "NonlinearTerm", f"constraint {cid!r}: division by non-literal denominator", cid))
            elif den.literal_value() == 0:
                errors.append(ValidationError(
                    "ZeroDenominator", f"constraint {cid!r}: division by zero literal", cid))
    return errors


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------

def defining_equalities(bundle: ConstraintBundle) -> dict[str, Expr]:
    """Map var -> defining RHS for hard constraints shaped `v = expr` / `v <=> expr`.

    When both sides are bare variables the left one is taken as defined.
    First definition wins; later ones are treated as ordinary constraints.
    """
    defs: dict[str, Expr] = {}
    for c in bundle.constraints:
        if c.kind != HARD:
            continue
        e = c.expr
        if e.op not in ("=", "iff"):
            continue
        left, right = e.args
        if left.op == "var" and left.value not in defs and left.value not in right.variables():
            defs[left.value] = right
        elif right.op == "var" and right.value not in defs and right.value not in left.variables():
            defs[right.value] = left
    return defs


def free_variables(bundle: ConstraintBundle, facts: Mapping[str, Value] | None = None) -> set[str]:
    """Declared variables that are neither assigned by `facts` nor fully
    determined (transitively) by hard defining equalities."""
    if facts is None:
        facts = bundle.facts
    for name in facts:
        if name not in bundle.var_sorts():
            raise KeyError(f"fact for undeclared variable {name!r}")

    determined = set(facts)
    defs = defining_equalities(bundle)
    changed = True
    while changed:
        changed = False
        for name, rhs in defs.items():
            if name not in determined and rhs.variables() <= determined:
                determined.add(name)
                changed = True
    return {v.name for v in bundle.vars} - determined


# ---------------------------------------------------------------------------
# JSON (de)serialization
# ---------------------------------------------------------------------------

def bundle_to_json(bundle: ConstraintBundle) -> dict[str, Any]:
    out: dict[str, Any] = {
        "case_id": bundle.case_id,
        "vars": [
            {"name": v.name, "sort": v.sort.value, **({"group": v.group} if v.group else {})}
            for v in bundle.vars
        ],
        "constraints": [],
        "penalty_var": bundle.penalty_var,
        "facts": {k: value_to_json(v) for k, v in bundle.facts.items()},
        "meta": dict(bundle.meta),
    }
    for c in bundle.constraints:
        entry: dict[str, Any] = {"id": c.id, "kind": c.kind, "group": c.group}
        if c.kind == SOFT:
            entry["weight"] = 1 if c.weight is None else c.weight
        if c.description:
            entry["description"] = c.description
        entry["expr"] = expr_to_json(c.expr)
        out["constraints"].append(entry)
    return out


def bundle_from_json(obj: Mapping[str, Any]) -> ConstraintBundle:
    vars = tuple(
        VarDecl(name=v["name"], sort=Sort(v["sort"]), group=v.get("group", ""))
        for v in obj.get("vars", ())
    )
    constraints = []
    for c in obj.get("constraints", ()):
        kind = c.get("kind", HARD)
        constraints.append(Constraint(
            id=c["id"],
            kind=kind,
            expr=parse_expr(c["expr"]),
            group=c.get("group", ""),
            weight=c.get("weight") if kind == SOFT else None,
            description=c.get("description", ""),
        ))
    return ConstraintBundle(
        case_id=obj.get("case_id", ""),
        vars=vars,
        constraints=tuple(constraints),
        penalty_var=obj.get("penalty_var", ""),
        facts={k: value_from_json(v) for k, v in obj.get("facts", {}).items()},
        meta=dict(obj.get("meta", {})),
    )


def dump_bundle(bundle: ConstraintBundle) -> str:
    """Canonical text form: stable key order, 2-space indent, trailing newline."""
    return json.dumps(bundle_to_json(bundle), indent=2, ensure_ascii=False) + "\n"


def load_bundle(text: str) -> ConstraintBundle:
    return bundle_from_json(json.loads(text))
