"""Minimal compliance solution via weighted MaxSMT.

Finds a model satisfying every statutory constraint (with the penalty pinned
to its lawful value) while minimizing the total weight of violated factual
constraints.  The violated set is the correction: the smallest factual
revision that restores legality.

Two interchangeable strategies are provided and must agree on cost:

LINEAR_SEARCH   relaxation scripts with fresh Boolean selectors per soft
                constraint and an integer cost bound, checked for
                k = 0, 1, 2, ...; every intermediate UNSAT is a certified
                lower bound and the first SAT is the optimum.
CORE_GUIDED     weighted core-guided lower-bound tightening: assert the softs
                hard and named; each unsat core raises the bound by the
                smallest core weight, splits those weights, and adds relaxed
                copies guarded by an exactly-one selector group.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .bundle import (
    Assignment,
    Constraint,
    ConstraintBundle,
    HARD,
    SOFT,
    VarDecl,
    validate_bundle,
)
from .exprs import Expr, Sort, Value, eval_expr, format_value, value_to_json
from .smtlib import (
    EmitOptions,
    MODE_HARDENED,
    MODE_RELAXATION,
    SAT,
    UNSAT,
    effective_weight,
    emit_script,
    penalty_pin_constraint,
)
from .solver import SolverConfig, SolverTimeout, default_config, run_check
from .verify import InvalidBundle, SolverInconclusive

STRATEGY_LINEAR = "linear_search"
STRATEGY_CORE = "core_guided"


class NoFeasibleCompliance(RuntimeError):
    """The hard constraint set (with the penalty pinned lawful) is
    unsatisfiable: no factual revision can restore legality."""


class OptimizationInvariantError(RuntimeError):
    """The solver's answer failed re-verification by the reference evaluator."""


@dataclass(frozen=True)
class DeltaEntry:
    constraint_id: str
    group: str
    weight: int
    originally_true: bool | None  # truth under the recorded facts, None if free
    satisfied_under_model: bool
    diffs: tuple[tuple[str, Value, Value], ...]  # (var, old, new)


@dataclass(frozen=True)
class CorrectionResult:
    model: Assignment
    delta: tuple[DeltaEntry, ...]
    cost: int
    strategy: str
    checks_performed: int
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class CorrectionTrace:
    lines: tuple[str, ...]

    def __iter__(self):
        return iter(self.lines)

    def text(self) -> str:
        return "\n".join(self.lines)


def result_to_json(r: CorrectionResult) -> dict[str, Any]:
    return {
        "model": {k: value_to_json(v) for k, v in sorted(r.model.items())},
        "delta": [
            {
                "constraint_id": d.constraint_id,
                "group": d.group,
                "weight": d.weight,
                "originally_true": d.originally_true,
                "satisfied_under_model": d.satisfied_under_model,
                "diffs": [{"var": v, "old": value_to_json(o), "new": value_to_json(n)}
                          for v, o, n in d.diffs],
            }
            for d in r.delta
        ],
        "cost": r.cost,
        "strategy": r.strategy,
        "checks_performed": r.checks_performed,
        "elapsed_ms": round(r.elapsed_ms, 3),
    }


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------

def _pinned(bundle: ConstraintBundle) -> ConstraintBundle:
    """The working bundle with `penalty = lawful` appended as hard, so every
    optimization result is a penalty-free revision."""
    pin = penalty_pin_constraint(bundle)
    return bundle.with_constraints((*bundle.constraints, pin))


def _delta_from_model(bundle: ConstraintBundle, model: Assignment,
                      override: Mapping[str, int]) -> tuple[tuple[DeltaEntry, ...], int]:
    delta = []
    cost = 0
    for c in bundle.soft():
        satisfied = bool(eval_expr(c.expr, model))
        if satisfied:
            continue
        try:
            originally = bool(eval_expr(c.expr, bundle.facts))
        except LookupError:
            originally = None
        diffs = []
        for name in sorted(c.expr.variables()):
            old = bundle.facts.get(name)
            new = model.get(name)
            if old is not None and new is not None and old != new:
                diffs.append((name, old, new))
        w = effective_weight(c, override)
        cost += w
        delta.append(DeltaEntry(
            constraint_id=c.id, group=c.group, weight=w,
            originally_true=originally, satisfied_under_model=False,
            diffs=tuple(diffs)))
    return tuple(delta), cost


def _verify_hard(bundle: ConstraintBundle, model: Assignment) -> None:
    pin = penalty_pin_constraint(bundle)
    for c in (*bundle.hard(), pin):
        if not bool(eval_expr(c.expr, model)):
            raise OptimizationInvariantError(
                f"model violates hard constraint {c.id!r}")


def _validated(bundle: ConstraintBundle) -> ConstraintBundle:
    errors = validate_bundle(bundle)
    if errors:
        raise InvalidBundle(errors)
    return bundle


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

def _linear_search(bundle: ConstraintBundle, override: Mapping[str, int],
                   cfg: SolverConfig):
    working = _pinned(bundle)
    total = sum(effective_weight(c, override) for c in bundle.soft())
    checks = 0
    for k in range(total + 1):
        script = emit_script(working, MODE_RELAXATION,
                             EmitOptions(relax_bound=k, weight_override=dict(override)))
        try:
            reply = run_check(script, cfg)
        except SolverTimeout as exc:
            raise SolverTimeout(exc.timeout_ms, best_bound=k) from None
        checks += 1
        if reply.status == SAT:
            return reply.model, checks
        if reply.status != UNSAT:
            raise SolverInconclusive(f"solver returned {reply.status!r} at bound {k}")
        if reply.core is not None and not any(
                script.name_map[n].origin == "soft" for n in reply.core):
            # conflict among hard constraints alone: no bound can help
            raise NoFeasibleCompliance(
                "hard constraints inconsistent: unsat core contains no facts")
    raise NoFeasibleCompliance(
        "hard constraints inconsistent: no relaxation of the facts is lawful")


def _exactly_one(selectors: list[str]) -> list[Expr]:
    at_least = Expr("or", tuple(Expr.var(s) for s in selectors)) \
        if len(selectors) > 1 else Expr.var(selectors[0])
    out = [at_least]
    for a, b in itertools.combinations(selectors, 2):
        out.append(Expr("or", (Expr("not", (Expr.var(a),)),
                               Expr("not", (Expr.var(b),)))))
    return out


def _core_guided(bundle: ConstraintBundle, override: Mapping[str, int],
                 cfg: SolverConfig):
    """Weighted core-guided search (Fu–Malik style weight splitting)."""
    weights = {c.id: effective_weight(c, override) for c in bundle.soft()}
    working = bundle
    cost = 0
    checks = 0
    fresh = 0
    for _ in range(sum(weights.values()) + 1):
        script = emit_script(working, MODE_HARDENED, EmitOptions())
        try:
            reply = run_check(script, cfg)
        except SolverTimeout as exc:
            raise SolverTimeout(exc.timeout_ms, best_bound=cost) from None
        checks += 1
        if reply.status == SAT:
            return reply.model, cost, checks
        if reply.status != UNSAT:
            raise SolverInconclusive(f"solver returned {reply.status!r} in core loop")
        core_soft = [script.name_map[n].constraint_id for n in (reply.core or ())
                     if script.name_map[n].origin == "soft"]
        if not core_soft:
            raise NoFeasibleCompliance(
                "hard constraints inconsistent: unsat core contains no facts")
        w_min = min(weights[cid] for cid in core_soft)
        cost += w_min

        by_id = {c.id: c for c in working.constraints}
        new_constraints = [c for c in working.constraints if c.id not in core_soft]
        new_vars = list(working.vars)
        selectors = []
        for cid in core_soft:
            orig = by_id[cid]
            remaining = weights[cid] - w_min
            if remaining > 0:
                new_constraints.append(Constraint(
                    id=cid, kind=SOFT, expr=orig.expr, group=orig.group,
                    weight=remaining, description=orig.description))
                weights[cid] = remaining
            else:
                del weights[cid]
            sel = f"relax_{fresh}"
            fresh += 1
            new_vars.append(VarDecl(sel, Sort.BOOL, "meta:relaxation"))
            selectors.append(sel)
            rid = f"rlxc_{fresh}_{cid}"
            weights[rid] = w_min
            new_constraints.append(Constraint(
                id=rid, kind=SOFT,
                expr=Expr("or", (orig.expr, Expr.var(sel))),
                group=orig.group, weight=w_min, description=orig.description))
        for i, e in enumerate(_exactly_one(selectors)):
            new_constraints.append(Constraint(
                id=f"card_{fresh}_{i}", kind=HARD, expr=e, group="meta:relaxation"))
        working = working.with_vars(new_vars).with_constraints(new_constraints)
    raise NoFeasibleCompliance("core-guided search exhausted the weight budget")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def minimize_violation(bundle: ConstraintBundle,
                       strategy: str = STRATEGY_LINEAR,
                       weights_override: Mapping[str, int] | None = None,
                       cfg: SolverConfig | None = None) -> CorrectionResult:
    """Compute the weighted-minimal set of factual revisions restoring
    legality, with the optimal model and its certified cost.

    `weights_override` maps constraint ids to positive multipliers applied on
    top of declared weights (it never replaces them), e.g. to raise the price
    of penalty-related facts.
    """
    bundle = _validated(bundle)
    override = dict(weights_override or {})
    for cid, mult in override.items():
        if not isinstance(mult, int) or mult < 1:
            raise ValueError(f"weight override for {cid!r} must be a positive integer")
    cfg = cfg or default_config()
    start = time.monotonic()

    if strategy == STRATEGY_LINEAR:
        model, checks = _linear_search(bundle, override, cfg)
        cost_lb = None
    elif strategy == STRATEGY_CORE:
        model, cost_lb, checks = _core_guided(bundle, override, cfg)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    own_vars = bundle.var_sorts()
    model = {k: v for k, v in model.items() if k in own_vars}
    delta, cost = _delta_from_model(bundle, model, override)
    _verify_hard(bundle, model)
    if cost_lb is not None and cost != cost_lb:
        raise OptimizationInvariantError(
            f"core-guided bound {cost_lb} disagrees with model cost {cost}")
    return CorrectionResult(
        model=model, delta=delta, cost=cost, strategy=strategy,
        checks_performed=checks, elapsed_ms=(time.monotonic() - start) * 1000.0)


def render_trace(result: CorrectionResult, bundle: ConstraintBundle,
                 phrasing: Callable[[tuple[str, ...]], tuple[str, ...]] | None = None,
                 ) -> CorrectionTrace:
    """Human-readable correction lines, one per violated fact, rendered from
    the constraint's description template when it has one.  `phrasing` may
    post-process the lines (e.g. through a language-model port); it is never
    required."""
    if not result.delta:
        return CorrectionTrace(("case is compliant; no revision required",))
    by_id = {c.id: c for c in bundle.constraints}
    lines = []
    for d in result.delta:
        diff_bits = [f"{v}: {_fmt(o)} -> {_fmt(n)}" for v, o, n in d.diffs]
        diff_text = "; ".join(diff_bits) if diff_bits else "no recorded value change"
        template = by_id[d.constraint_id].description if d.constraint_id in by_id else ""
        if template:
            first = d.diffs[0] if d.diffs else ("", "", "")
            try:
                line = template.format(
                    id=d.constraint_id, group=d.group, diffs=diff_text,
                    var=first[0], old=_fmt(first[1]), new=_fmt(first[2]))
            except (KeyError, IndexError):
                line = ""
            if line:
                lines.append(line)
                continue
        lines.append(f"constraint {d.constraint_id} ({d.group}) requires revision: {diff_text}")
    out = tuple(lines)
    if phrasing is not None:
        out = tuple(phrasing(out))
    return CorrectionTrace(out)


def _fmt(v: Value | str) -> str:
    if isinstance(v, str):
        return v
    return format_value(v)
