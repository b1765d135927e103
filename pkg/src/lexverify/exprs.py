"""Typed expression trees over declared variables.

Expressions are the unit of compilation: every constraint body is an Expr
of sort BOOL built from variables, exact numeric literals, arithmetic and
logical connectives.  Real-valued literals are exact decimal strings and
all evaluation is done with `fractions.Fraction`, never floats, so that
threshold comparisons (`r < 150` at r = 149.999...) cannot drift.

Wire format: nested arrays with an operator-name head, e.g.
``["and", ["<", "r", "50.0"], ["not", "plan_executed"]]``.  Leaves are
JSON booleans, JSON integers, decimal strings ("111.09") and variable
names (strings that do not parse as decimals).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterator, Mapping


class Sort(str, Enum):
    BOOL = "bool"
    INT = "int"
    REAL = "real"


class ExprError(ValueError):
    """Malformed expression (bad arity, unknown operator, bad literal)."""


class SortError(ExprError):
    """Expression does not type-check against the declared variable sorts."""


class FreeVariableEncountered(LookupError):
    """Raised by eval_expr when it reaches a variable absent from the assignment."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class DivisionByZero(ArithmeticError):
    """A zero denominator reached the evaluator (validation normally rejects it)."""


# Leaf operators carry `value`; compound operators carry `args`.
LEAF_OPS = ("bool", "int", "dec", "var")
NARY_OPS = ("and", "or", "+")
BINARY_OPS = ("-", "*", "/", "<", "<=", ">", ">=", "=", "!=", "=>", "iff")
UNARY_OPS = ("not", "neg")
TERNARY_OPS = ("ite",)

COMPARISONS = ("<", "<=", ">", ">=", "=", "!=")
_LOGIC = ("and", "or", "not", "=>", "iff")

_DECIMAL_RE = re.compile(r"^-?\d+\.\d+$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def is_decimal_string(s: str) -> bool:
    return bool(_DECIMAL_RE.match(s))


def is_identifier(s: str) -> bool:
    return bool(_IDENT_RE.match(s)) and not is_decimal_string(s)


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple["Expr", ...] = ()
    value: Any = None

    def __post_init__(self):
        if self.op in LEAF_OPS:
            if self.args:
                raise ExprError(f"leaf {self.op!r} takes no arguments")
        elif self.op in NARY_OPS:
            if len(self.args) < 2:
                raise ExprError(f"{self.op!r} needs at least two arguments")
        elif self.op in BINARY_OPS:
            if len(self.args) != 2:
                raise ExprError(f"{self.op!r} needs exactly two arguments")
        elif self.op in UNARY_OPS:
            if len(self.args) != 1:
                raise ExprError(f"{self.op!r} needs exactly one argument")
        elif self.op in TERNARY_OPS:
            if len(self.args) != 3:
                raise ExprError("ite needs condition, then, else")
        else:
            raise ExprError(f"unknown operator {self.op!r}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def true() -> "Expr":
        return Expr("bool", value=True)

    @staticmethod
    def false() -> "Expr":
        return Expr("bool", value=False)

    @staticmethod
    def boolean(b: bool) -> "Expr":
        return Expr("bool", value=bool(b))

    @staticmethod
    def integer(n: int) -> "Expr":
        return Expr("int", value=int(n))

    @staticmethod
    def decimal(s: str) -> "Expr":
        if not is_decimal_string(s):
            raise ExprError(f"not an exact decimal string: {s!r}")
        return Expr("dec", value=s)

    @staticmethod
    def var(name: str) -> "Expr":
        if not is_identifier(name):
            raise ExprError(f"not a valid identifier: {name!r}")
        return Expr("var", value=name)

    # -- inspection --------------------------------------------------------

    def is_literal(self) -> bool:
        """Numeric literal, possibly wrapped in a negation."""
        if self.op in ("int", "dec"):
            return True
        return self.op == "neg" and self.args[0].op in ("int", "dec")

    def literal_value(self) -> Fraction:
        if self.op == "int":
            return Fraction(self.value)
        if self.op == "dec":
            return Fraction(self.value)
        if self.op == "neg" and self.args[0].is_literal():
            return -self.args[0].literal_value()
        raise ExprError(f"not a numeric literal: {self.op!r}")

    def walk(self) -> Iterator["Expr"]:
        yield self
        for a in self.args:
            yield from a.walk()

    def variables(self) -> set[str]:
        return {e.value for e in self.walk() if e.op == "var"}


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def parse_expr(obj: Any) -> Expr:
    """Parse the nested-array wire form into an Expr tree."""
    if isinstance(obj, bool):
        return Expr.boolean(obj)
    if isinstance(obj, int):
        return Expr.integer(obj)
    if isinstance(obj, float):
        raise ExprError(
            f"float literal {obj!r} not allowed; use a decimal string for exactness")
    if isinstance(obj, str):
        if is_decimal_string(obj):
            return Expr.decimal(obj)
        if is_identifier(obj):
            return Expr.var(obj)
        raise ExprError(f"string leaf is neither decimal nor identifier: {obj!r}")
    if isinstance(obj, (list, tuple)):
        if not obj or not isinstance(obj[0], str):
            raise ExprError(f"compound expression needs an operator head: {obj!r}")
        return Expr(obj[0], tuple(parse_expr(a) for a in obj[1:]))
    raise ExprError(f"cannot parse expression node: {obj!r}")


def expr_to_json(e: Expr) -> Any:
    if e.op == "bool":
        return bool(e.value)
    if e.op == "int":
        return int(e.value)
    if e.op in ("dec", "var"):
        return e.value
    return [e.op, *[expr_to_json(a) for a in e.args]]


# ---------------------------------------------------------------------------
# Sort inference
# ---------------------------------------------------------------------------

def infer_sort(e: Expr, var_sorts: Mapping[str, Sort]) -> Sort:
    """Return the sort of `e`, raising SortError on any ill-sorted subterm."""
    if e.op == "bool":
        return Sort.BOOL
    if e.op == "int":
        return Sort.INT
    if e.op == "dec":
        return Sort.REAL
    if e.op == "var":
        try:
            return var_sorts[e.value]
        except KeyError:
            raise SortError(f"unknown variable {e.value!r}") from None

    arg_sorts = [infer_sort(a, var_sorts) for a in e.args]

    if e.op in _LOGIC:
        for a, s in zip(e.args, arg_sorts):
            if s is not Sort.BOOL:
                raise SortError(f"{e.op!r} needs BOOL operands, got {s.value} in {render_infix(a)}")
        return Sort.BOOL

    if e.op in COMPARISONS:
        left, right = arg_sorts
        if e.op in ("=", "!=") and left is Sort.BOOL and right is Sort.BOOL:
            return Sort.BOOL
        if left is Sort.BOOL or right is Sort.BOOL:
            raise SortError(f"comparison {e.op!r} over BOOL operand")
        if left is not right:
            raise SortError(
                f"comparison {e.op!r} mixes {left.value} and {right.value}; "
                "operands must share a numeric sort")
        return Sort.BOOL

    if e.op in ("+", "-", "*", "/", "neg"):
        sorts = set(arg_sorts)
        if Sort.BOOL in sorts:
            raise SortError(f"arithmetic {e.op!r} over BOOL operand")
        if len(sorts) > 1:
            raise SortError(f"arithmetic {e.op!r} mixes int and real operands")
        only = arg_sorts[0]
        if e.op == "/":
            if only is not Sort.REAL:
                raise SortError("division is defined over REAL operands only")
            return Sort.REAL
        return only

    if e.op == "ite":
        cond, then, other = arg_sorts
        if cond is not Sort.BOOL:
            raise SortError("ite condition must be BOOL")
        if then is not other:
            raise SortError(f"ite branches differ: {then.value} vs {other.value}")
        return then

    raise SortError(f"unknown operator {e.op!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Exact evaluation
# ---------------------------------------------------------------------------

Value = bool | int | Fraction


def eval_expr(e: Expr, assignment: Mapping[str, Value]) -> Value:
    """Evaluate under an assignment with exact rational arithmetic.

    Raises FreeVariableEncountered for the first unassigned variable reached
    (short-circuiting connectives may never reach one), and DivisionByZero if
    a zero denominator slipped past validation.
    """
    op = e.op
    if op == "bool":
        return bool(e.value)
    if op == "int":
        return int(e.value)
    if op == "dec":
        return Fraction(e.value)
    if op == "var":
        try:
            v = assignment[e.value]
        except KeyError:
            raise FreeVariableEncountered(e.value) from None
        return Fraction(v) if isinstance(v, float) else v

    if op == "and":
        return all(_as_bool(eval_expr(a, assignment)) for a in e.args)
    if op == "or":
        return any(_as_bool(eval_expr(a, assignment)) for a in e.args)
    if op == "not":
        return not _as_bool(eval_expr(e.args[0], assignment))
    if op == "=>":
        if not _as_bool(eval_expr(e.args[0], assignment)):
            return True
        return _as_bool(eval_expr(e.args[1], assignment))
    if op == "iff":
        return _as_bool(eval_expr(e.args[0], assignment)) == _as_bool(
            eval_expr(e.args[1], assignment))
    if op == "ite":
        branch = e.args[1] if _as_bool(eval_expr(e.args[0], assignment)) else e.args[2]
        return eval_expr(branch, assignment)

    if op in COMPARISONS:
        left = eval_expr(e.args[0], assignment)
        right = eval_expr(e.args[1], assignment)
        if isinstance(left, bool) or isinstance(right, bool):
            if op == "=":
                return left == right
            if op == "!=":
                return left != right
            raise SortError(f"ordered comparison {op!r} over BOOL")
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "=":
            return left == right
        return left != right

    if op == "neg":
        return -_as_num(eval_expr(e.args[0], assignment))
    if op == "+":
        total: int | Fraction = 0
        for a in e.args:
            total = total + _as_num(eval_expr(a, assignment))
        return total
    if op == "-":
        return _as_num(eval_expr(e.args[0], assignment)) - _as_num(
            eval_expr(e.args[1], assignment))
    if op == "*":
        return _as_num(eval_expr(e.args[0], assignment)) * _as_num(
            eval_expr(e.args[1], assignment))
    if op == "/":
        num = _as_num(eval_expr(e.args[0], assignment))
        den = _as_num(eval_expr(e.args[1], assignment))
        if den == 0:
            raise DivisionByZero(render_infix(e))
        return Fraction(num) / Fraction(den)

    raise ExprError(f"unknown operator {op!r}")  # pragma: no cover


def _as_bool(v: Value) -> bool:
    if not isinstance(v, bool):
        raise SortError(f"expected boolean, got {v!r}")
    return v


def _as_num(v: Value):
    if isinstance(v, bool):
        raise SortError(f"expected number, got boolean {v!r}")
    return v


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_INFIX = {
    "and": "and", "or": "or", "=>": "=>", "iff": "<=>",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=", "=": "=", "!=": "!=",
    "+": "+", "-": "-", "*": "*", "/": "/",
}


def render_infix(e: Expr) -> str:
    """Human-readable infix form used in traces and diagnostics."""
    if e.op == "bool":
        return "true" if e.value else "false"
    if e.op == "int":
        return str(e.value)
    if e.op == "dec":
        return e.value
    if e.op == "var":
        return e.value
    if e.op == "not":
        return f"not {_wrap(e.args[0])}"
    if e.op == "neg":
        return f"-{_wrap(e.args[0])}"
    if e.op == "ite":
        c, t, f = (render_infix(a) for a in e.args)
        return f"(if {c} then {t} else {f})"
    sym = _INFIX[e.op]
    return f" {sym} ".join(_wrap(a) for a in e.args)


def _wrap(e: Expr) -> str:
    if e.op in LEAF_OPS or e.op in ("not", "neg"):
        return render_infix(e)
    return f"({render_infix(e)})"


def format_value(v: Value) -> str:
    """Lossless text form of an evaluation result (decimal when exact)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    f = Fraction(v)
    if f.denominator == 1:
        return str(f.numerator)
    # print as exact decimal when the denominator is 2^a * 5^b
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        scale = max(twos, fives)
        digits = abs(f.numerator) * 10**scale // f.denominator
        s = str(digits).rjust(scale + 1, "0")
        sign = "-" if f.numerator < 0 else ""
        return f"{sign}{s[:-scale]}.{s[-scale:]}" if scale else f"{sign}{s}"
    return f"{f.numerator}/{f.denominator}"


def value_to_json(v: Value) -> Any:
    """JSON form: booleans and ints natively, rationals as decimal strings."""
    if isinstance(v, bool) or isinstance(v, int):
        return v
    f = Fraction(v)
    if f.denominator == 1:
        return int(f)
    s = format_value(f)
    return s if "." in s else [f.numerator, f.denominator]


def value_from_json(obj: Any) -> Value:
    if isinstance(obj, bool) or isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        raise ExprError(f"float value {obj!r} not allowed; use a decimal string")
    if isinstance(obj, str):
        if is_decimal_string(obj):
            return Fraction(obj)
        raise ExprError(f"not a decimal value string: {obj!r}")
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return Fraction(int(obj[0]), int(obj[1]))
    raise ExprError(f"cannot parse value: {obj!r}")
