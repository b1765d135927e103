"""The bundled solver is checked against independent oracles: truth tables
over small finite boxes, and exact re-evaluation of every model it emits."""

import itertools
import random
import re
from fractions import Fraction

import pytest

from lexverify.refsolver import Session, solve_text


def first_line(out: str) -> str:
    return out.strip().splitlines()[0]


def parse_model_block(out: str) -> dict:
    vals = {}
    for m in re.finditer(r"\(define-fun (\S+) \(\) (\w+)\s+(.+?)\)\n", out + "\n"):
        name, sort, raw = m.groups()
        raw = raw.strip()
        if sort == "Bool":
            vals[name] = raw == "true"
        else:
            neg = raw.startswith("(-")
            stripped = raw.replace("(-", "").replace("(/", "").replace(")", "").strip()
            parts = stripped.split()
            v = Fraction(int(parts[0]), int(parts[1])) if len(parts) == 2 else Fraction(parts[0])
            vals[name] = -v if neg else v
    return vals


def test_trivial_sat_unsat():
    assert first_line(solve_text("(declare-const p Bool)(assert p)(check-sat)")) == "sat"
    assert first_line(solve_text(
        "(declare-const p Bool)(assert p)(assert (not p))(check-sat)")) == "unsat"
    assert first_line(solve_text("(assert false)(check-sat)")) == "unsat"


def test_minimal_core_excludes_irrelevant():
    out = solve_text("""(set-option :produce-unsat-cores true)
(declare-const x Real)
(declare-const p Bool)
(assert (! (> x 2.0) :named a1))
(assert (! (< x 1.0) :named a2))
(assert (! (or p (not p)) :named a3))
(check-sat)
(get-unsat-core)
""")
    assert first_line(out) == "unsat"
    core_line = out.strip().splitlines()[-1]
    assert "a1" in core_line and "a2" in core_line and "a3" not in core_line


def test_model_after_unsat_is_an_error():
    out = solve_text("(assert false)(check-sat)(get-model)")
    assert "error" in out


def test_core_without_option_is_an_error():
    out = solve_text("(declare-const p Bool)(assert p)(assert (not p))(check-sat)(get-unsat-core)")
    assert first_line(out) == "unsat"
    assert "error" in out


def test_version_info():
    out = solve_text("(get-info :version)")
    assert ":version" in out and "refsolver" in out


def test_unsupported_command_reports_error_but_continues():
    out = solve_text("(push 1)(declare-const p Bool)(assert p)(check-sat)")
    assert "error" in out
    assert "sat" in out


def test_nonlinear_term_rejected():
    out = solve_text("(declare-const x Real)(assert (> (* x x) 1.0))(check-sat)")
    assert "error" in out


def test_integer_gap_unsat():
    out = solve_text("(declare-const k Int)(assert (> (* 3 k) 1))(assert (< (* 3 k) 2))(check-sat)")
    assert first_line(out) == "unsat"


def test_rational_exactness_near_threshold():
    # 149.999 < 150 must hold exactly
    out = solve_text("""(declare-const r Real)
(assert (= r (/ 149999 1000)))
(assert (< r 150.0))
(check-sat)
""")
    assert first_line(out) == "sat"
    out2 = solve_text("""(declare-const r Real)
(assert (= r (/ 149999 1000)))
(assert (>= r 150.0))
(check-sat)
""")
    assert first_line(out2) == "unsat"


def test_determinism():
    script = """(set-option :produce-unsat-cores true)
(declare-const a Bool)(declare-const b Bool)(declare-const x Int)
(assert (! (or a b) :named n1))
(assert (! (not a) :named n2))
(assert (! (not b) :named n3))
(assert (! (>= x 0) :named n4))
(check-sat)
(get-unsat-core)
"""
    outs = {solve_text(script) for _ in range(5)}
    assert len(outs) == 1


def _truth_table_gen(rng, bools, ints, depth):
    choice = rng.random()
    if depth <= 0 or choice < 0.35:
        if rng.random() < 0.5 and bools:
            b = rng.choice(bools)
            return b, lambda env, b=b: env[b]
        x = rng.choice(ints)
        c = rng.randint(-3, 3)
        op = rng.choice(["<", "<=", ">", ">=", "=", "distinct"])
        pyop = {"<": "<", "<=": "<=", ">": ">", ">=": ">=",
                "=": "==", "distinct": "!="}[op]
        k = rng.randint(1, 2)
        return (f"({op} (* {k} {x}) {c})",
                lambda env, x=x, c=c, k=k, p=pyop: eval(f"{k}*env[x] {p} c"))
    op = rng.choice(["and", "or", "not", "=>", "ite"])
    if op == "not":
        s, f = _truth_table_gen(rng, bools, ints, depth - 1)
        return f"(not {s})", lambda env, f=f: not f(env)
    if op == "=>":
        s1, f1 = _truth_table_gen(rng, bools, ints, depth - 1)
        s2, f2 = _truth_table_gen(rng, bools, ints, depth - 1)
        return f"(=> {s1} {s2})", lambda env, f1=f1, f2=f2: (not f1(env)) or f2(env)
    if op == "ite":
        parts = [_truth_table_gen(rng, bools, ints, depth - 1) for _ in range(3)]
        (s1, f1), (s2, f2), (s3, f3) = parts
        return (f"(ite {s1} {s2} {s3})",
                lambda env, f1=f1, f2=f2, f3=f3: f2(env) if f1(env) else f3(env))
    n = rng.randint(2, 3)
    parts = [_truth_table_gen(rng, bools, ints, depth - 1) for _ in range(n)]
    ss = " ".join(p[0] for p in parts)
    fs = [p[1] for p in parts]
    if op == "and":
        return f"(and {ss})", lambda env, fs=fs: all(f(env) for f in fs)
    return f"(or {ss})", lambda env, fs=fs: any(f(env) for f in fs)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_verdicts_match_exhaustive_enumeration(seed):
    rng = random.Random(seed)
    for _ in range(80):
        bools, ints = ["p", "q"], ["x", "y"]
        gens = [_truth_table_gen(rng, bools, ints, rng.randint(1, 3))
                for _ in range(rng.randint(1, 4))]
        script = []
        for b in bools:
            script.append(f"(declare-const {b} Bool)")
        for x in ints:
            script.append(f"(declare-const {x} Int)")
            script.append(f"(assert (<= (- 3) {x}))")
            script.append(f"(assert (<= {x} 3))")
        for s, _ in gens:
            script.append(f"(assert {s})")
        script.append("(check-sat)")
        got = first_line(solve_text("\n".join(script)))
        expect = "sat" if any(
            all(f({"p": pv[0], "q": pv[1], "x": xv[0], "y": xv[1]}) for _, f in gens)
            for pv in itertools.product([False, True], repeat=2)
            for xv in itertools.product(range(-3, 4), repeat=2)
        ) else "unsat"
        assert got == expect, "\n".join(script)


@pytest.mark.parametrize("seed", [11, 12])
def test_sat_models_reevaluate_exactly(seed):
    rng = random.Random(seed)
    for _ in range(120):
        names = ["a", "b", "c"]
        script, sorts, asserts = [], {}, []
        for n in names:
            s = rng.choice(["Real", "Int"])
            sorts[n] = s
            script.append(f"(declare-const {n} {s})")
        for _ in range(rng.randint(2, 5)):
            terms, py = [], []
            for n in names:
                if rng.random() < 0.7:
                    k = rng.randint(-3, 3)
                    if k:
                        terms.append(f"(* {k} {n})" if k != 1 else n)
                        py.append((k, n))
            if not terms:
                continue
            rhsn = rng.randint(-40, 40)
            if any(sorts[n] == "Real" for _, n in py):
                rhs, rhsv = f"(/ {rhsn} 10)", Fraction(rhsn, 10)
            else:
                rhs, rhsv = str(rhsn), Fraction(rhsn)
            op = rng.choice(["<", "<=", ">", ">=", "="])
            lhs = terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"
            asserts.append((py, op, rhsv))
            script.append(f"(assert ({op} {lhs} {rhs}))")
        script.append("(check-sat)")
        script.append("(get-model)")
        out = solve_text("\n".join(script))
        if first_line(out) != "sat":
            continue
        model = parse_model_block(out)
        for py, op, rhsv in asserts:
            lhsv = sum(Fraction(k) * model[n] for k, n in py)
            assert {"<": lhsv < rhsv, "<=": lhsv <= rhsv, ">": lhsv > rhsv,
                    ">=": lhsv >= rhsv, "=": lhsv == rhsv}[op]
        for n in names:
            if sorts[n] == "Int":
                assert model[n].denominator == 1


def test_session_reuse_is_isolated():
    s1 = Session()
    out1 = s1.run_script("(declare-const p Bool)(assert p)(check-sat)")
    s2 = Session()
    out2 = s2.run_script("(declare-const p Bool)(assert (not p))(check-sat)")
    assert first_line(out1) == "sat" and first_line(out2) == "sat"
