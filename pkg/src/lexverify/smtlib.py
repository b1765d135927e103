"""Compilation of bundles to SMT-LIB 2 scripts and parsing of solver replies.

Every asserted formula is wrapped ``(! phi :named <name>)`` so unsat cores can
be traced back to constraints; the script carries the name map.  Emission is a
pure function: identical bundle + mode + options yield byte-identical text,
and golden scripts are diffed byte-wise in the tests.

Modes
-----
CONSISTENCY   hard (law) constraints only.
ILLEGALITY    hard + fact constraints asserted hard + the penalty pinned
              to its lawful value — unsatisfiability certifies the case
              necessarily triggers a penalty.
HARDENED      same assertion set as ILLEGALITY but honoring an exclusion
              list, used by the iterative illegal-term enumeration.
RELAXATION    hard constraints plus, per soft constraint s_i, a clause
              ``(or s_i lam_i)`` with a fresh Boolean selector and an integer
              violation-cost bound  sum w_i * ite(lam_i, 1, 0) <= k.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .bundle import Assignment, Constraint, ConstraintBundle, HARD
from .exprs import Expr, Sort, Value

MODE_CONSISTENCY = "consistency"
MODE_ILLEGALITY = "illegality"
MODE_HARDENED = "hardened"
MODE_RELAXATION = "relaxation"

PENALTY_PIN_ID = "penalty_pin"
_DEFAULT_PIN_GROUP = "meta:penalty_conditions"

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"


class UnsupportedExpr(ValueError):
    """A term outside the linear fragment escaped validation."""


class ProtocolError(ValueError):
    """Solver output could not be parsed; carries the offending excerpt so the
    self-healing loop can feed it back."""

    def __init__(self, message: str, excerpt: str = ""):
        super().__init__(message)
        self.excerpt = excerpt


@dataclass(frozen=True)
class NameEntry:
    constraint_id: str
    group: str
    origin: str  # "hard" | "soft" | "pin"


@dataclass(frozen=True)
class EmitOptions:
    exclude_ids: frozenset[str] = frozenset()
    relax_bound: int = 0
    weight_override: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class SmtScript:
    text: str
    name_map: Mapping[str, NameEntry]
    mode: str
    var_sorts: Mapping[str, Sort]

    def id_of(self, name: str) -> str:
        return self.name_map[name].constraint_id

    def group_of(self, name: str) -> str:
        return self.name_map[name].group


@dataclass(frozen=True)
class SolverReply:
    status: str
    model: Assignment | None = None
    core: tuple[str, ...] | None = None  # assertion names
    raw: str = ""
    elapsed_ms: float = 0.0

    def core_ids(self, script: SmtScript) -> tuple[str, ...]:
        return tuple(script.id_of(n) for n in self.core or ())

    def core_groups(self, script: SmtScript) -> tuple[str, ...]:
        seen: list[str] = []
        for n in self.core or ():
            g = script.group_of(n)
            if g not in seen:
                seen.append(g)
        return tuple(seen)


# ---------------------------------------------------------------------------
# Expression -> SMT-LIB term
# ---------------------------------------------------------------------------

def emit_rational(f: Fraction, sort: Sort) -> str:
    f = Fraction(f)
    if sort is Sort.INT:
        if f.denominator != 1:
            raise UnsupportedExpr(f"non-integral INT literal {f}")
        return str(f.numerator) if f.numerator >= 0 else f"(- {-f.numerator})"
    if f.denominator == 1:
        n = f.numerator
        return f"{n}.0" if n >= 0 else f"(- {-n}.0)"
    if f.numerator < 0:
        return f"(- (/ {-f.numerator} {f.denominator}))"
    return f"(/ {f.numerator} {f.denominator})"


_SMT_OPS = {
    "and": "and", "or": "or", "not": "not", "=>": "=>", "ite": "ite",
    "+": "+", "-": "-", "neg": "-", "*": "*", "/": "/",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=",
}


def emit_expr(e: Expr) -> str:
    if e.op == "bool":
        return "true" if e.value else "false"
    if e.op == "int":
        return emit_rational(Fraction(e.value), Sort.INT)
    if e.op == "dec":
        return emit_rational(Fraction(e.value), Sort.REAL)
    if e.op == "var":
        return e.value
    if e.op == "iff":
        return f"(= {emit_expr(e.args[0])} {emit_expr(e.args[1])})"
    if e.op == "=":
        return f"(= {emit_expr(e.args[0])} {emit_expr(e.args[1])})"
    if e.op == "!=":
        return f"(distinct {emit_expr(e.args[0])} {emit_expr(e.args[1])})"
    op = _SMT_OPS.get(e.op)
    if op is None:
        raise UnsupportedExpr(f"operator {e.op!r} has no SMT-LIB form")
    return "(" + op + "".join(" " + emit_expr(a) for a in e.args) + ")"


_SORT_NAMES = {Sort.BOOL: "Bool", Sort.INT: "Int", Sort.REAL: "Real"}
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _assertion_name(cid: str, taken: set[str]) -> str:
    name = cid if _NAME_RE.match(cid) else "n" + re.sub(r"[^A-Za-z0-9_]", "_", cid)
    base, i = name, 1
    while name in taken:
        name = f"{base}_{i}"
        i += 1
    taken.add(name)
    return name


def penalty_pin_constraint(bundle: ConstraintBundle) -> Constraint:
    """The `penalty = lawful` assertion appended by the illegality check;
    BOOL penalties pin to false, 0/1 INT penalties to 0."""
    sort = bundle.var_sorts()[bundle.penalty_var]
    if sort is Sort.BOOL:
        expr = Expr("=", (Expr.var(bundle.penalty_var), Expr.false()))
    else:
        expr = Expr("=", (Expr.var(bundle.penalty_var), Expr.integer(0)))
    group = bundle.var_map()[bundle.penalty_var].group or _DEFAULT_PIN_GROUP
    return Constraint(id=PENALTY_PIN_ID, kind=HARD, expr=expr, group=group)


def effective_weight(c: Constraint, override: Mapping[str, int]) -> int:
    base = 1 if c.weight is None else c.weight
    return base * int(override.get(c.id, 1))


def asserted_constraints(bundle: ConstraintBundle, mode: str,
                         options: EmitOptions = EmitOptions()) -> list[Constraint]:
    """The exact constraint set a mode asserts (soft ones hardened where the
    mode says so).  Exported so tests can re-evaluate models against it."""
    if mode == MODE_CONSISTENCY:
        return list(bundle.hard())
    if mode in (MODE_ILLEGALITY, MODE_HARDENED):
        out = [c for c in bundle.constraints if c.id not in options.exclude_ids]
        out.append(penalty_pin_constraint(bundle))
        return out
    if mode == MODE_RELAXATION:
        return [c for c in bundle.hard() if c.id not in options.exclude_ids]
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Script emission
# ---------------------------------------------------------------------------

def emit_script(bundle: ConstraintBundle, mode: str,
                options: EmitOptions = EmitOptions()) -> SmtScript:
    lines = [
        "(set-logic QF_LIRA)",
        "(set-option :produce-models true)",
        "(set-option :produce-unsat-cores true)",
    ]
    var_sorts = dict(bundle.var_sorts())
    for v in bundle.vars:
        lines.append(f"(declare-const {v.name} {_SORT_NAMES[v.sort]})")

    name_map: dict[str, NameEntry] = {}
    taken: set[str] = set()

    def assert_named(expr: Expr, cid: str, group: str, origin: str):
        name = _assertion_name(cid, taken)
        name_map[name] = NameEntry(cid, group, origin)
        lines.append(f"(assert (! {emit_expr(expr)} :named {name}))")

    if mode == MODE_RELAXATION:
        softs = [c for c in bundle.soft() if c.id not in options.exclude_ids]
        selectors: list[tuple[str, int]] = []
        for i, c in enumerate(softs):
            lam = f"lam_{i}"
            lines.append(f"(declare-const {lam} Bool)")
            var_sorts[lam] = Sort.BOOL
            selectors.append((lam, effective_weight(c, options.weight_override)))
        for c in (c for c in bundle.hard() if c.id not in options.exclude_ids):
            assert_named(c.expr, c.id, c.group, "hard")
        for (lam, _), c in zip(selectors, softs):
            name = _assertion_name(f"rlx_{c.id}", taken)
            name_map[name] = NameEntry(c.id, c.group, "soft")
            lines.append(f"(assert (! (or {emit_expr(c.expr)} {lam}) :named {name}))")
        if selectors:
            terms = " ".join(f"(* {w} (ite {lam} 1 0))" for lam, w in selectors)
            total = f"(+ {terms})" if len(selectors) > 1 else terms
            lines.append(f"(assert (<= {total} {options.relax_bound}))")
    elif mode == MODE_CONSISTENCY:
        for c in bundle.hard():
            assert_named(c.expr, c.id, c.group, "hard")
    elif mode in (MODE_ILLEGALITY, MODE_HARDENED):
        for c in bundle.constraints:
            if c.id in options.exclude_ids:
                continue
            assert_named(c.expr, c.id, c.group, c.kind)
        pin = penalty_pin_constraint(bundle)
        assert_named(pin.expr, pin.id, pin.group, "pin")
    else:
        raise ValueError(f"unknown mode {mode!r}")

    lines.append("(check-sat)")
    lines.append("(get-model)")
    lines.append("(get-unsat-core)")
    return SmtScript(text="\n".join(lines) + "\n", name_map=name_map,
                     mode=mode, var_sorts=var_sorts)


# ---------------------------------------------------------------------------
# Reply parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r'\(|\)|"[^"]*"|[^\s()]+')


def _sexprs(text: str) -> list[Any]:
    stack: list[list[Any]] = []
    top: list[Any] = []
    for tok in _TOKEN_RE.findall(text):
        if tok == "(":
            stack.append(top)
            top = []
        elif tok == ")":
            if not stack:
                raise ProtocolError("unbalanced ')' in solver output", text[:200])
            done = top
            top = stack.pop()
            top.append(done)
        else:
            top.append(tok)
    if stack:
        raise ProtocolError("unbalanced '(' in solver output", text[:200])
    return top


def _parse_numeric(node: Any) -> Fraction:
    if isinstance(node, str):
        if re.match(r"^-?\d+$", node):
            return Fraction(int(node))
        if re.match(r"^-?\d+\.\d+$", node):
            return Fraction(node)
        raise ProtocolError(f"unparseable numeric {node!r}", str(node))
    if isinstance(node, list) and node:
        if node[0] == "-" and len(node) == 2:
            return -_parse_numeric(node[1])
        if node[0] == "/" and len(node) == 3:
            return _parse_numeric(node[1]) / _parse_numeric(node[2])
    raise ProtocolError(f"unparseable numeric term {node!r}", str(node))


def _parse_model(nodes: list[Any], var_sorts: Mapping[str, Sort]) -> Assignment:
    model: Assignment = {}
    for node in nodes:
        if not isinstance(node, list) or not node:
            continue
        if node[0] != "define-fun" or len(node) < 5:
            continue
        name = node[1]
        body = node[4]
        sort = var_sorts.get(name)
        if sort is None:
            continue  # solver-internal symbol
        if sort is Sort.BOOL:
            model[name] = body == "true"
        elif sort is Sort.INT:
            f = _parse_numeric(body)
            if f.denominator != 1:
                raise ProtocolError(f"non-integral Int model value for {name}", str(body))
            model[name] = int(f)
        else:
            model[name] = _parse_numeric(body)
    return model


def complete_model(model: Assignment, script: SmtScript) -> Assignment:
    """Fill sort-zero defaults (false / 0) for declared variables the solver
    omitted as don't-care, keeping the evaluator total."""
    out = dict(model)
    for name, sort in script.var_sorts.items():
        if name not in out:
            out[name] = False if sort is Sort.BOOL else (
                0 if sort is Sort.INT else Fraction(0))
    return out


def parse_reply(raw: str, script: SmtScript) -> SolverReply:
    status = None
    for line in raw.splitlines():
        word = line.strip()
        if word in (SAT, UNSAT, UNKNOWN):
            status = word
            break
    if status is None:
        raise ProtocolError("no sat/unsat/unknown status in solver output", raw[:200])

    # drop the status line and error responses, then parse remaining s-exprs
    body_lines = [ln for ln in raw.splitlines() if ln.strip() not in (SAT, UNSAT, UNKNOWN)]
    nodes = [n for n in _sexprs("\n".join(body_lines))
             if not (isinstance(n, list) and n and n[0] == "error")]

    model: Assignment | None = None
    core: tuple[str, ...] | None = None
    for node in nodes:
        if not isinstance(node, list):
            continue
        if node and node[0] == "model":
            if status == SAT:
                model = _parse_model(node[1:], script.var_sorts)
        elif any(isinstance(x, list) and x and x[0] == "define-fun" for x in node):
            if status == SAT:
                model = _parse_model(node, script.var_sorts)
        elif all(isinstance(x, str) for x in node):
            if status == UNSAT:
                for name in node:
                    if name not in script.name_map:
                        raise ProtocolError(f"core name {name!r} not in name map", raw[:200])
                core = tuple(node)

    if status == SAT and model is None:
        model = {}
    if status == SAT:
        model = complete_model(model, script)
    return SolverReply(status=status, model=model, core=core, raw=raw)
