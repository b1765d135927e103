"""Seeded synthetic case bundles matching the observed case-scale statistics.

Bundles are drawn to mirror real enforcement-case shapes: variable counts
from a clipped normal (mean 12.85, sd 5.60, clipped to [4, 40]), constraint
counts likewise (mean 30.81, sd 9.62, clipped to [11, 63]), roughly 63% hard.
The statutory part is generated against a hidden witness assignment and every
hard constraint is emitted true under the witness, so the law base is
satisfiable by construction; facts are pinned at the witness value with a
controlled perturbation rate, so a tunable share of cases genuinely violates
the penalty rule.

Generation is driven by ``random.Random`` over integer seeds only, so a seed
yields identical bundles on every platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .bundle import Assignment, Constraint, ConstraintBundle, HARD, SOFT, VarDecl
from .cases import value_expr
from .exprs import Expr, Sort, Value, eval_expr

VAR_MEAN, VAR_SD, VAR_MIN, VAR_MAX = 12.85, 5.60, 4, 40
CON_MEAN, CON_SD, CON_MIN, CON_MAX = 30.81, 9.62, 11, 63
HARD_RATIO = 0.63


@dataclass(frozen=True)
class GenParams:
    hard_ratio: float = HARD_RATIO
    # chance a pinned fact disagrees with the witness; corrections observed in
    # real cases are small (single-digit flips), so the default keeps optima
    # in that range
    perturb_rate: float = 0.15
    weight_low: int = 1
    weight_high: int = 1
    max_soft: int | None = None
    max_constraints: int | None = None
    max_vars: int | None = None


def _clipped_normal(rng: random.Random, mean: float, sd: float, lo: int, hi: int) -> int:
    return max(lo, min(hi, round(rng.normalvariate(mean, sd))))


def _witness_value(rng: random.Random, sort: Sort) -> Value:
    if sort is Sort.BOOL:
        return rng.random() < 0.5
    if sort is Sort.INT:
        return rng.randint(-10, 10)
    return Fraction(rng.randint(-9999, 9999), 100)


class _CaseBuilder:
    """Emits constraints one by one, each true under the witness at emission
    time.  A variable becomes frozen once any emitted constraint mentions it;
    only unfrozen variables may be (re)defined, so earlier constraints stay
    true when later definitions adjust witness values."""

    def __init__(self, rng: random.Random, case_id: str, params: GenParams):
        self.rng = rng
        self.case_id = case_id
        self.params = params
        self.vars: list[VarDecl] = []
        self.witness: Assignment = {}
        self.frozen: set[str] = set()
        self.constraints: list[Constraint] = []
        self.pin_counts: dict[str, int] = {}

    # -- variables ----------------------------------------------------------

    def make_vars(self, n: int):
        counts = {"bool": max(1, round(n * 0.57)), "real": round(n * 0.28)}
        counts["int"] = max(0, n - counts["bool"] - counts["real"] - 1)
        for i in range(counts["bool"]):
            self._declare(f"b{i}", Sort.BOOL, "facts:actions")
        for i in range(counts["real"]):
            self._declare(f"x{i}", Sort.REAL, "facts:reported")
        for i in range(counts["int"]):
            self._declare(f"k{i}", Sort.INT, "facts:reported")
        if self.rng.random() < 0.8:
            self._declare("penalty", Sort.BOOL, "meta:penalty_conditions")
        else:
            self._declare("penalty", Sort.INT, "meta:penalty_conditions")

    def _declare(self, name: str, sort: Sort, group: str):
        self.vars.append(VarDecl(name, sort, group))
        self.witness[name] = _witness_value(self.rng, sort)

    def of_sort(self, sort: Sort) -> list[str]:
        return [v.name for v in self.vars if v.sort == sort and v.name != "penalty"]

    def _emit(self, c: Constraint):
        self.frozen.update(c.expr.variables())
        self.constraints.append(c)

    # -- random pieces evaluated against the witness -------------------------

    def _numeric_atom(self, truth: bool | None = None) -> Expr:
        """Comparison over declared numerics; when `truth` is set, the
        threshold is chosen so the atom has that truth under the witness."""
        rng = self.rng
        reals, ints = self.of_sort(Sort.REAL), self.of_sort(Sort.INT)
        if reals and (rng.random() < 0.7 or not ints):
            name = rng.choice(reals)
            value = Fraction(self.witness[name])
            op = rng.choice(["<", "<=", ">", ">="])
            margin = Fraction(rng.randint(1, 2000), 100)
            if truth is None:
                bound = value + (margin if rng.random() < 0.5 else -margin)
            elif (op in ("<", "<=")) == truth:
                bound = value + margin
            else:
                bound = value - margin
            return Expr(op, (Expr.var(name), value_expr(bound, Sort.REAL)))
        if ints:
            name = rng.choice(ints)
            value = int(self.witness[name])
            op = rng.choice(["<", "<=", ">", ">="])
            margin = rng.randint(1, 12)
            if truth is None:
                bound = value + (margin if rng.random() < 0.5 else -margin)
            elif (op in ("<", "<=")) == truth:
                bound = value + margin
            else:
                bound = value - margin
            return Expr(op, (Expr.var(name), Expr.integer(bound)))
        # bool-only bundles: fall back to a literal of known truth
        name = self.rng.choice(self.of_sort(Sort.BOOL))
        e = Expr.var(name)
        actual = bool(self.witness[name])
        want = actual if truth is None else truth
        return e if actual == want else Expr("not", (e,))

    def _bool_literal(self, truth: bool) -> Expr:
        name = self.rng.choice(self.of_sort(Sort.BOOL))
        e = Expr.var(name)
        return e if bool(self.witness[name]) == truth else Expr("not", (e,))

    # -- hard constraints -----------------------------------------------------

    def add_definition(self, idx: int):
        """Derived-variable defining equality; the target must be unfrozen so
        adjusting its witness value cannot break earlier constraints."""
        rng = self.rng
        cid = f"law_def_{idx}"
        free_bools = [n for n in self.of_sort(Sort.BOOL) if n not in self.frozen]
        free_reals = [n for n in self.of_sort(Sort.REAL) if n not in self.frozen]
        free_ints = [n for n in self.of_sort(Sort.INT) if n not in self.frozen]
        kind = rng.random()
        if kind < 0.45 and free_bools and len(self.of_sort(Sort.BOOL)) >= 3:
            target = rng.choice(free_bools)
            others = [n for n in self.of_sort(Sort.BOOL) if n != target]
            a, b = rng.sample(others, 2) if len(others) >= 2 else (others[0], others[0])
            rhs = Expr(rng.choice(["and", "or"]), (Expr.var(a), Expr.var(b)))
            self.witness[target] = eval_expr(rhs, self.witness)
            self._emit(Constraint(id=cid, kind=HARD, group="rules:definitions",
                                  expr=Expr("iff", (Expr.var(target), rhs))))
            return
        if kind < 0.75 and free_reals and len(self.of_sort(Sort.REAL)) >= 2:
            target = rng.choice(free_reals)
            src = rng.choice([n for n in self.of_sort(Sort.REAL) if n != target])
            coeff = Expr.decimal(f"{rng.randint(1, 300) / 100:.2f}")
            shift = Expr.decimal(f"{rng.randint(-9999, 9999) / 100:.2f}")
            rhs = Expr("+", (Expr("*", (coeff, Expr.var(src))), shift))
            self.witness[target] = eval_expr(rhs, self.witness)
            self._emit(Constraint(id=cid, kind=HARD, group="rules:definitions",
                                  expr=Expr("=", (Expr.var(target), rhs))))
            return
        if free_ints and len(self.of_sort(Sort.INT)) >= 2:
            target = rng.choice(free_ints)
            src = rng.choice([n for n in self.of_sort(Sort.INT) if n != target])
            rhs = Expr("+", (Expr.var(src), Expr.integer(rng.randint(-5, 5))))
            self.witness[target] = eval_expr(rhs, self.witness)
            self._emit(Constraint(id=cid, kind=HARD, group="rules:definitions",
                                  expr=Expr("=", (Expr.var(target), rhs))))
            return
        self._emit(Constraint(id=cid, kind=HARD, group="rules:definitions",
                              expr=self._numeric_atom(truth=True)))

    def add_rule(self, idx: int):
        """Implication or clause, true under the witness."""
        rng = self.rng
        cid = f"law_rule_{idx}"
        shape = rng.random()
        if shape < 0.5:
            expr = Expr("=>", (self._numeric_atom(), self._bool_literal(True)))
        elif shape < 0.8:
            lits = [self._numeric_atom(truth=rng.random() < 0.5) for _ in range(2)]
            lits.append(self._bool_literal(True))  # guarantees the clause
            rng.shuffle(lits)
            expr = Expr("or", tuple(lits))
        else:
            expr = Expr("or", (self._numeric_atom(truth=True),
                               self._bool_literal(rng.random() < 0.5)))
        self._emit(Constraint(id=cid, kind=HARD, expr=expr,
                              group=rng.choice(["rules:thresholds", "rules:obligations"])))

    def add_penalty_rule(self):
        """penalty <-> disjunction of violation conditions."""
        rng = self.rng
        conds = [self._numeric_atom() for _ in range(rng.randint(1, 3))]
        conds.append(self._bool_literal(rng.random() < 0.4))
        violation = Expr("or", tuple(conds))
        sort = {v.name: v.sort for v in self.vars}["penalty"]
        fires = bool(eval_expr(violation, self.witness))
        if sort is Sort.BOOL:
            self.witness["penalty"] = fires
            expr = Expr("iff", (Expr.var("penalty"), violation))
        else:
            self.witness["penalty"] = int(fires)
            expr = Expr("=", (Expr.var("penalty"),
                              Expr("ite", (violation, Expr.integer(1), Expr.integer(0)))))
        self._emit(Constraint(id="law_penalty", kind=HARD, expr=expr,
                              group="meta:penalty_conditions"))

    # -- soft constraints -----------------------------------------------------

    def add_fact(self, idx: int):
        """Pin a fact, spreading pins across variables (real cases rarely
        state the same fact twice)."""
        rng = self.rng
        candidates = [v for v in self.vars if v.name != "penalty"]
        low = min(self.pin_counts.get(v.name, 0) for v in candidates)
        pool = [v for v in candidates if self.pin_counts.get(v.name, 0) == low]
        target = rng.choice(pool)
        self.pin_counts[target.name] = self.pin_counts.get(target.name, 0) + 1
        value = self.witness[target.name]
        if rng.random() < self.params.perturb_rate:
            if target.sort is Sort.BOOL:
                value = not value
            elif target.sort is Sort.INT:
                value = int(value) + rng.choice([-3, -2, -1, 1, 2, 3])
            else:
                value = Fraction(value) + Fraction(
                    rng.choice([-1, 1]) * rng.randint(1, 4000), 100)
        weight = rng.randint(self.params.weight_low, self.params.weight_high)
        group = "facts:actions" if target.sort is Sort.BOOL else "facts:reported"
        self._emit(Constraint(
            id=f"fact_{idx}_{target.name}", kind=SOFT,
            expr=Expr("=", (Expr.var(target.name), value_expr(value, target.sort))),
            group=group, weight=weight))

    def facts_map(self) -> Assignment:
        facts: Assignment = {}
        for c in self.constraints:
            if c.kind == SOFT and c.expr.op == "=" and c.expr.args[0].op == "var":
                facts[c.expr.args[0].value] = eval_expr(c.expr.args[1], {})
        return facts

    def build(self) -> ConstraintBundle:
        return ConstraintBundle(
            case_id=self.case_id,
            vars=tuple(self.vars),
            constraints=tuple(self.constraints),
            penalty_var="penalty",
            facts=self.facts_map(),
            meta={"origin": "synthetic", "generator": "lexverify gen-cases"},
        )


def generate_case(seed: int, index: int, params: GenParams = GenParams()) -> ConstraintBundle:
    rng = random.Random(seed * 1_000_003 + index)
    n_vars = _clipped_normal(rng, VAR_MEAN, VAR_SD, VAR_MIN, VAR_MAX)
    # constraint count grows with variable count (the observed case scatter is
    # strongly positively correlated, ~2.4 constraints per variable)
    n_cons = max(CON_MIN, min(CON_MAX, round(n_vars * 2.4 + rng.normalvariate(0, 3.5))))
    if params.max_vars:
        n_vars = min(n_vars, params.max_vars)
    if params.max_constraints:
        n_cons = min(n_cons, params.max_constraints)
    n_hard = max(1, round(n_cons * params.hard_ratio))
    n_soft = max(1, n_cons - n_hard)
    if params.max_soft is not None:
        n_soft = min(n_soft, params.max_soft)

    b = _CaseBuilder(rng, f"synthetic-{seed}-{index}", params)
    b.make_vars(n_vars)
    b.add_penalty_rule()
    for i in range(n_hard - 1):
        if rng.random() < 0.45:
            b.add_definition(i)
        else:
            b.add_rule(i)
    for i in range(n_soft):
        b.add_fact(i)
    return b.build()


def generate_cases(n: int, seed: int, params: GenParams = GenParams()) -> list[ConstraintBundle]:
    return [generate_case(seed, i, params) for i in range(n)]
