import re
from fractions import Fraction
from pathlib import Path

import pytest

from lexverify import refsolver
from lexverify.bundle import Constraint, ConstraintBundle, HARD, SOFT, VarDecl, validate_bundle
from lexverify.exprs import Sort, eval_expr, parse_expr
from lexverify.gencases import generate_cases
from lexverify.smtlib import (
    EmitOptions,
    MODE_CONSISTENCY,
    MODE_HARDENED,
    MODE_ILLEGALITY,
    MODE_RELAXATION,
    ProtocolError,
    asserted_constraints,
    complete_model,
    emit_rational,
    emit_script,
    parse_reply,
)

GOLDEN = Path(__file__).resolve().parent.parent / "fixtures" / "smt"


def test_decimal_emitted_as_exact_rational():
    assert emit_rational(Fraction("111.09"), Sort.REAL) == "(/ 11109 100)"
    assert emit_rational(Fraction("100.0"), Sort.REAL) == "100.0"
    assert emit_rational(Fraction("-2.5"), Sort.REAL) == "(- (/ 5 2))"
    assert emit_rational(Fraction(-3), Sort.INT) == "(- 3)"
    script_text = emit_script(_ratio_bundle(), MODE_CONSISTENCY).text
    assert "(/ 11109 100)" in script_text


def _ratio_bundle():
    return ConstraintBundle(
        case_id="ratio",
        vars=(VarDecl("r", Sort.REAL), VarDecl("penalty", Sort.BOOL)),
        constraints=(Constraint(id="pin_r", kind=HARD,
                                expr=parse_expr(["=", "r", "111.09"])),),
        penalty_var="penalty",
    )


def test_golden_illegality_script_byte_identical(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    golden = (GOLDEN / "fsc_illegality.smt2").read_text()
    assert script.text == golden


def test_emit_is_deterministic(fsc):
    a = emit_script(fsc, MODE_ILLEGALITY)
    b = emit_script(fsc, MODE_ILLEGALITY)
    assert a.text == b.text
    assert a.name_map == b.name_map


def test_relaxation_without_softs_equals_illegality_minus_pin(fsc):
    hard_only = fsc.with_constraints(fsc.hard())
    illegality = emit_script(hard_only, MODE_ILLEGALITY).text
    relaxation = emit_script(hard_only, MODE_RELAXATION, EmitOptions(relax_bound=0)).text
    pin_lines = [ln for ln in illegality.splitlines() if "penalty_pin" in ln]
    assert len(pin_lines) == 1
    stripped = "\n".join(ln for ln in illegality.splitlines() if "penalty_pin" not in ln) + "\n"
    assert relaxation == stripped


def test_consistency_asserts_only_hard(fsc):
    script = emit_script(fsc, MODE_CONSISTENCY)
    assert "fact_own_capital" not in script.text
    assert "penalty_pin" not in script.text
    assert all(entry.origin == "hard" for entry in script.name_map.values())


def test_relaxation_structure(fsc):
    script = emit_script(fsc, MODE_RELAXATION, EmitOptions(relax_bound=2))
    assert "(declare-const lam_0 Bool)" in script.text
    assert re.search(r"\(assert \(<= \(\+ .*\(ite lam_0 1 0\).*\) 2\)\)", script.text)
    # soft weights appear as literal multipliers in the cost bound
    assert "(* 2 (ite lam_0 1 0))" in script.text
    assert "(* 1 (ite lam_3 1 0))" in script.text


def test_hardened_exclusion(fsc):
    script = emit_script(fsc, MODE_HARDENED,
                         EmitOptions(exclude_ids=frozenset({"fact_own_capital"})))
    assert "fact_own_capital" not in script.text
    assert "fact_risk_capital" in script.text


def test_name_totality(fsc):
    for mode in (MODE_CONSISTENCY, MODE_ILLEGALITY, MODE_HARDENED):
        script = emit_script(fsc, mode)
        named = re.findall(r":named ([A-Za-z0-9_]+)\)", script.text)
        assert set(named) == set(script.name_map)


def test_parse_reply_unsat_core_maps_to_groups(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    raw = "unsat\n(c_capital_level c_penalty_def c_l3_exec)\n"
    reply = parse_reply(raw, script)
    assert reply.status == "unsat"
    assert reply.core == ("c_capital_level", "c_penalty_def", "c_l3_exec")
    assert set(reply.core_groups(script)) == {
        "insurance:capital_level", "meta:penalty_conditions",
        "insurance:level_3_measures_executed"}


def test_parse_reply_sat_single_binding(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    raw = "sat\n(model (define-fun penalty () Bool false))\n"
    reply = parse_reply(raw, script)
    assert reply.status == "sat"
    assert reply.model["penalty"] is False
    # omitted bindings default to sort zero
    assert reply.model["own_capital"] == Fraction(0)
    assert reply.model["capital_level"] == 0


def test_parse_reply_unknown(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    reply = parse_reply("unknown\n", script)
    assert reply.status == "unknown"
    assert reply.model is None and reply.core is None


def test_parse_reply_skips_error_lines(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    raw = 'unsat\n(error "model is not available")\n(c_capital_level)\n'
    reply = parse_reply(raw, script)
    assert reply.core == ("c_capital_level",)


def test_parse_reply_malformed_raises(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    with pytest.raises(ProtocolError):
        parse_reply("garbage output\n", script)
    with pytest.raises(ProtocolError):
        parse_reply("unsat\n(this_name_is_not_registered)\n", script)


def test_parse_reply_rational_model_values(fsc):
    script = emit_script(fsc, MODE_ILLEGALITY)
    raw = ("sat\n(model (define-fun own_capital () Real (/ 11109 100))"
           "(define-fun capital_level () Int (- 2))"
           "(define-fun net_worth () Real (- (/ 5 2))))\n")
    reply = parse_reply(raw, script)
    assert reply.model["own_capital"] == Fraction("111.09")
    assert reply.model["capital_level"] == -2
    assert reply.model["net_worth"] == Fraction("-2.5")


def test_round_trip_sat_models_satisfy_asserted_constraints():
    """For generated bundles, every SAT reply's model makes every asserted
    formula true under the reference evaluator."""
    bundles = generate_cases(6, seed=55)
    checked = 0
    for bundle in bundles:
        assert validate_bundle(bundle) == []
        for mode in (MODE_CONSISTENCY, MODE_ILLEGALITY):
            script = emit_script(bundle, mode)
            raw = refsolver.solve_text(script.text)
            reply = parse_reply(raw, script)
            if reply.status != "sat":
                continue
            model = complete_model(reply.model, script)
            for c in asserted_constraints(bundle, mode):
                assert eval_expr(c.expr, model) is True, (bundle.case_id, mode, c.id)
            checked += 1
    assert checked >= 3
