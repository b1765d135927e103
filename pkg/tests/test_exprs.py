from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lexverify.exprs import (
    DivisionByZero,
    Expr,
    ExprError,
    FreeVariableEncountered,
    Sort,
    SortError,
    eval_expr,
    expr_to_json,
    format_value,
    infer_sort,
    parse_expr,
    render_infix,
    value_from_json,
    value_to_json,
)


def test_ratio_evaluates_exactly():
    # r = own_capital / risk_capital * 100 at the reported filing values
    e = parse_expr(["*", ["/", "own_capital", "risk_capital"], "100.0"])
    value = eval_expr(e, {"own_capital": Fraction("111.09"), "risk_capital": Fraction("100.0")})
    assert value == Fraction("111.09")
    assert value == Fraction(11109, 100)


def test_boolean_identity():
    e = parse_expr(["and", True, ["not", True]])
    assert eval_expr(e, {}) is False


def test_ite_boundary_branch():
    e = parse_expr(["ite", [">=", "r", "200.0"], 1, 3])
    assert eval_expr(e, {"r": Fraction(200)}) == 1
    assert eval_expr(e, {"r": Fraction("199.999")}) == 3


def test_exactness_no_float_drift():
    e = parse_expr(["/", ["*", "111.09", "100.0"], "100.0"])
    assert eval_expr(e, {}) == Fraction(11109, 100)
    # decimal printer round-trips losslessly
    assert format_value(Fraction(11109, 100)) == "111.09"
    assert Fraction(format_value(Fraction("149.999"))) == Fraction("149.999")


def test_free_variable_names_first_unassigned():
    e = parse_expr(["+", "a", "b"])
    with pytest.raises(FreeVariableEncountered) as err:
        eval_expr(e, {"a": 1})
    assert err.value.name == "b"


def test_division_by_zero_variable_denominator():
    e = parse_expr(["/", "1.0", "d"])
    with pytest.raises(DivisionByZero):
        eval_expr(e, {"d": Fraction(0)})


def test_parse_rejects_floats():
    with pytest.raises(ExprError):
        parse_expr(1.5)


def test_parse_json_round_trip():
    obj = ["iff", "penalty", ["or", ["and", ["=", "capital_level", 3], ["not", "L3_exec"]],
                              ["<", ["*", "2.0", "x"], "3.5"]]]
    e = parse_expr(obj)
    assert expr_to_json(e) == obj
    assert parse_expr(expr_to_json(e)) == e


def test_sort_inference():
    sorts = {"r": Sort.REAL, "k": Sort.INT, "p": Sort.BOOL}
    assert infer_sort(parse_expr(["<", "r", "50.0"]), sorts) is Sort.BOOL
    assert infer_sort(parse_expr(["+", "k", 1]), sorts) is Sort.INT
    with pytest.raises(SortError):
        infer_sort(parse_expr(["<", "r", 50]), sorts)  # REAL vs INT comparison
    with pytest.raises(SortError):
        infer_sort(parse_expr(["and", "p", "r"]), sorts)
    with pytest.raises(SortError):
        infer_sort(parse_expr(["ite", "p", 1, "2.0"]), sorts)
    with pytest.raises(SortError):
        infer_sort(parse_expr("unknown_var"), sorts)


def test_render_infix_readable():
    e = parse_expr([">=", "r", "200.0"])
    assert render_infix(e) == "r >= 200.0"
    e2 = parse_expr(["=>", ["<", "r", "50.0"], "p"])
    assert "r < 50.0" in render_infix(e2)


def test_value_json_round_trip():
    for v in (True, False, 7, -3, Fraction("111.09"), Fraction(1, 3)):
        assert value_from_json(value_to_json(v)) == v


# -- property: sort soundness ------------------------------------------------

_SORTS = {"b1": Sort.BOOL, "b2": Sort.BOOL, "x": Sort.REAL, "y": Sort.REAL,
          "k": Sort.INT}


def _numeric(sort, depth):
    leaf_pool = ["x", "y"] if sort is Sort.REAL else ["k"]
    literal = (st.integers(-50, 50).map(lambda n: f"{n}.5") if sort is Sort.REAL
               else st.integers(-50, 50))
    leaves = st.one_of(st.sampled_from(leaf_pool), literal)
    if depth <= 0:
        return leaves
    sub = _numeric(sort, depth - 1)
    return st.one_of(
        leaves,
        st.tuples(sub, sub).map(lambda t: ["+", t[0], t[1]]),
        st.tuples(sub, sub).map(lambda t: ["-", t[0], t[1]]),
        st.tuples(literal, sub).map(lambda t: ["*", t[0], t[1]]),
    )


def _boolean(depth):
    leaves = st.one_of(st.sampled_from(["b1", "b2"]), st.booleans())
    if depth <= 0:
        return leaves
    sub = _boolean(depth - 1)
    num_r = _numeric(Sort.REAL, depth - 1)
    num_i = _numeric(Sort.INT, depth - 1)
    cmp_op = st.sampled_from(["<", "<=", ">", ">=", "=", "!="])
    return st.one_of(
        leaves,
        st.tuples(sub, sub).map(lambda t: ["and", t[0], t[1]]),
        st.tuples(sub, sub).map(lambda t: ["or", t[0], t[1]]),
        sub.map(lambda s: ["not", s]),
        st.tuples(sub, sub).map(lambda t: ["=>", t[0], t[1]]),
        st.tuples(cmp_op, num_r, num_r).map(list),
        st.tuples(cmp_op, num_i, num_i).map(list),
        st.tuples(sub, sub, sub).map(lambda t: ["ite", t[0], t[1], t[2]]),
    )


@given(_boolean(3))
def test_well_sorted_exprs_evaluate_without_sort_errors(obj):
    e = parse_expr(obj)
    assert infer_sort(e, _SORTS) is Sort.BOOL
    total = {"b1": True, "b2": False, "x": Fraction("1.25"), "y": Fraction(-3),
             "k": 4}
    result = eval_expr(e, total)
    assert isinstance(result, bool)
