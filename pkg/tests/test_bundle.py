from fractions import Fraction

import pytest

from lexverify.bundle import (
    Constraint,
    ConstraintBundle,
    HARD,
    SOFT,
    VarDecl,
    bundle_from_json,
    bundle_to_json,
    dump_bundle,
    free_variables,
    load_bundle,
    validate_bundle,
)
from lexverify.exprs import Expr, Sort, parse_expr


def _codes(errors):
    return [e.code for e in errors]


def _tiny(constraints, vars=None, facts=None, penalty="penalty"):
    vars = vars if vars is not None else (
        VarDecl("penalty", Sort.BOOL),
        VarDecl("a", Sort.BOOL),
        VarDecl("x", Sort.REAL),
    )
    return ConstraintBundle(case_id="t", vars=tuple(vars),
                            constraints=tuple(constraints),
                            penalty_var=penalty, facts=facts or {})


def test_fsc_fixture_is_valid(fsc):
    assert validate_bundle(fsc) == []


def test_unknown_variable_reported():
    b = _tiny([Constraint(id="c1", kind=HARD, expr=parse_expr("x_undeclared"))])
    assert "UnknownVariable" in _codes(validate_bundle(b))


def test_nonpositive_weight_rejected():
    b = _tiny([
        Constraint(id="law", kind=HARD, expr=parse_expr("a")),
        Constraint(id="s", kind=SOFT, expr=parse_expr("a"), weight=0),
    ])
    assert "NonpositiveWeight" in _codes(validate_bundle(b))


def test_duplicate_constraint_id():
    b = _tiny([
        Constraint(id="c", kind=HARD, expr=parse_expr("a")),
        Constraint(id="c", kind=HARD, expr=parse_expr(["not", "a"])),
    ])
    assert "DuplicateId" in _codes(validate_bundle(b))


def test_weight_on_hard_rejected():
    b = _tiny([Constraint(id="c", kind=HARD, expr=parse_expr("a"), weight=2)])
    assert "WeightOnHard" in _codes(validate_bundle(b))


def test_missing_penalty_var():
    b = _tiny([Constraint(id="c", kind=HARD, expr=parse_expr("a"))],
              penalty="nope")
    assert "MissingPenaltyVar" in _codes(validate_bundle(b))


def test_no_hard_constraints_rejected():
    b = _tiny([Constraint(id="s", kind=SOFT, expr=parse_expr("a"), weight=1)])
    assert "NoHardConstraints" in _codes(validate_bundle(b))


def test_nonlinear_product_rejected():
    b = _tiny([Constraint(id="c", kind=HARD,
                          expr=parse_expr(["<", ["*", "x", "x"], "4.0"]))])
    assert "NonlinearTerm" in _codes(validate_bundle(b))


def test_nonliteral_denominator_rejected():
    b = _tiny([Constraint(id="c", kind=HARD,
                          expr=parse_expr(["<", ["/", "1.0", "x"], "4.0"]))])
    assert "NonlinearTerm" in _codes(validate_bundle(b))


def test_zero_denominator_rejected():
    b = _tiny([Constraint(id="c", kind=HARD,
                          expr=parse_expr(["<", ["/", "x", "0.0"], "4.0"]))])
    assert "ZeroDenominator" in _codes(validate_bundle(b))


def test_fact_sort_mismatch():
    b = _tiny([Constraint(id="c", kind=HARD, expr=parse_expr("a"))],
              facts={"x": True})
    assert "SortMismatch" in _codes(validate_bundle(b))


def test_non_boolean_constraint_rejected():
    b = _tiny([Constraint(id="c", kind=HARD, expr=parse_expr(["+", "x", "1.0"]))])
    assert "NonBooleanConstraint" in _codes(validate_bundle(b))


# -- free variables ----------------------------------------------------------

def test_fsc_free_variables_contain_unreported_measures(fsc):
    free = free_variables(fsc)
    assert {"person_removed", "asset_approved"} <= free
    # reported facts and derived definitions are not free
    assert "own_capital" not in free
    assert "capital_level" not in free
    assert "L2_exec" not in free


def test_free_variables_total_facts(fsc):
    facts = {v.name: _value_for(v.sort) for v in fsc.vars}
    assert free_variables(fsc, facts) == set()


def test_free_variables_empty_facts(fsc):
    free = free_variables(fsc, {})
    # nothing assigned: only variables defined by equalities over other
    # defined variables could drop out; with no seeds everything stays free
    assert "own_capital" in free
    assert "plan_executed" in free


def _value_for(sort):
    if sort is Sort.BOOL:
        return True
    if sort is Sort.INT:
        return 1
    return Fraction(1)


# -- serialization ------------------------------------------------------------

def test_bundle_json_round_trip(fsc):
    again = bundle_from_json(bundle_to_json(fsc))
    assert again == fsc
    assert dump_bundle(again) == dump_bundle(fsc)


def test_load_dump_stability(fsc):
    text = dump_bundle(fsc)
    assert load_bundle(text) == fsc
    assert dump_bundle(load_bundle(text)) == text
