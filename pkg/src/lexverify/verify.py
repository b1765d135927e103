"""The three verification checks over a case bundle.

* law consistency   — the statutory (hard) constraints alone are satisfiable;
                      an inconsistent law base means the encoding needs repair
                      before any case reasoning is meaningful.
* case illegality   — law + facts + ``penalty = false``; UNSAT certifies that
                      the factual configuration necessarily triggers a penalty
                      and the named core pinpoints the conflicting units.
* illegal terms     — iterated core extraction with all constraints hardened:
                      each round records the core, keeps the members that
                      trace to statutory constraints, frees the factual core
                      members, and repeats until satisfiable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any

from .bundle import Assignment, ConstraintBundle, validate_bundle
from .exprs import value_to_json
from .smtlib import (
    EmitOptions,
    MODE_CONSISTENCY,
    MODE_HARDENED,
    MODE_ILLEGALITY,
    SAT,
    UNSAT,
    emit_script,
)
from .solver import SolverConfig, default_config, run_check


class InvalidBundle(ValueError):
    def __init__(self, errors):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


class PreconditionError(RuntimeError):
    """An operation was invoked out of order (e.g. enumerating illegal terms
    on a case whose illegality check is satisfiable)."""


class SolverInconclusive(RuntimeError):
    """The backend answered `unknown` where a definite verdict is required."""


@dataclass(frozen=True)
class Verdict:
    status: str
    model: Assignment | None = None
    core_ids: tuple[str, ...] = ()
    core_groups: tuple[str, ...] = ()
    elapsed_ms: float = 0.0

    def is_sat(self) -> bool:
        return self.status == SAT

    def is_unsat(self) -> bool:
        return self.status == UNSAT


def verdict_to_json(v: Verdict) -> dict[str, Any]:
    out: dict[str, Any] = {"status": v.status, "elapsed_ms": round(v.elapsed_ms, 3)}
    if v.model is not None:
        out["model"] = {k: value_to_json(x) for k, x in sorted(v.model.items())}
    if v.core_ids:
        out["core"] = {"ids": list(v.core_ids), "groups": list(v.core_groups)}
    return out


def _checked(bundle: ConstraintBundle) -> ConstraintBundle:
    errors = validate_bundle(bundle)
    if errors:
        raise InvalidBundle(errors)
    return bundle


def _run(bundle: ConstraintBundle, mode: str, cfg: SolverConfig | None,
         options: EmitOptions = EmitOptions()):
    script = emit_script(bundle, mode, options)
    reply = run_check(script, cfg or default_config())
    return script, reply


def _verdict(script, reply) -> Verdict:
    return Verdict(
        status=reply.status,
        model=reply.model,
        core_ids=reply.core_ids(script),
        core_groups=reply.core_groups(script),
        elapsed_ms=reply.elapsed_ms,
    )


def check_law_consistency(bundle: ConstraintBundle,
                          cfg: SolverConfig | None = None) -> Verdict:
    """SAT means the statutory encoding is coherent; on UNSAT the core names
    the self-contradictory rules for refinement."""
    script, reply = _run(_checked(bundle), MODE_CONSISTENCY, cfg)
    return _verdict(script, reply)


def check_case_illegality(bundle: ConstraintBundle,
                          cfg: SolverConfig | None = None) -> Verdict:
    """Solve law + facts + penalty pinned lawful.  UNSAT is the expected
    outcome for a genuine violation; SAT signals the encoding fails to
    capture it and is surfaced to the repair loop."""
    script, reply = _run(_checked(bundle), MODE_ILLEGALITY, cfg)
    return _verdict(script, reply)


@dataclass(frozen=True)
class TermGroup:
    group: str
    constraint_ids: tuple[str, ...]


@dataclass(frozen=True)
class IllegalTermReport:
    terms: tuple[TermGroup, ...]
    rounds: tuple[tuple[str, ...], ...]  # constraint ids per round core
    sat_reached: bool
    elapsed_ms: float = 0.0

    def term_groups(self) -> tuple[str, ...]:
        return tuple(t.group for t in self.terms)


def report_to_json(r: IllegalTermReport) -> dict[str, Any]:
    return {
        "terms": [{"group": t.group, "constraint_ids": list(t.constraint_ids)}
                  for t in r.terms],
        "rounds": [list(core) for core in r.rounds],
        "sat_reached": r.sat_reached,
        "elapsed_ms": round(r.elapsed_ms, 3),
    }


# a single drop round can bury a conflict whose factual support it removes,
# so on desk-scale instances each round enumerates every minimal core of the
# current system (any minimal core of a reduced system is one of the full
# system, so the union is exact); larger instances take the solver's one
# minimal core per round as a fast approximation
EXACT_CORE_UNION_LIMIT = 20


def _minimal_core_of(bundle, dropped, cfg):
    """One solver round: (status, core ids, id -> name_map entry)."""
    script, reply = _run(bundle, MODE_HARDENED, cfg,
                         EmitOptions(exclude_ids=frozenset(dropped)))
    if reply.status == SAT:
        return SAT, (), {}
    if reply.status != UNSAT:
        raise SolverInconclusive(
            f"solver returned {reply.status!r} during illegal-term enumeration")
    if reply.core is None:
        from .solver import CoreUnsupported

        raise CoreUnsupported(
            "solver returned no unsat core; illegal-term enumeration needs "
            "a core-producing backend")
    entries = {script.id_of(n): script.name_map[n] for n in reply.core}
    return UNSAT, tuple(script.id_of(n) for n in reply.core), entries


def _all_cores_union(bundle, dropped, cfg, memo):
    """Union of all minimal cores of the hardened system minus `dropped`,
    by recursive core-guided exploration: shrink a core, then re-explore with
    each of its removable members excluded."""
    union_ids: dict[str, object] = {}
    stack = [frozenset(dropped)]
    seen = set()
    while stack:
        drops = stack.pop()
        if drops in seen:
            continue
        seen.add(drops)
        if drops not in memo:
            memo[drops] = _minimal_core_of(bundle, drops, cfg)
        status, core_ids, entries = memo[drops]
        if status == SAT:
            continue
        for cid in core_ids:
            union_ids.setdefault(cid, entries[cid])
            if cid != "penalty_pin":
                stack.append(drops | {cid})
    return union_ids


def enumerate_illegal_terms(bundle: ConstraintBundle,
                            cfg: SolverConfig | None = None) -> IllegalTermReport:
    """Expose the full set of statutory units involved in the violation.

    Every constraint (facts included) is asserted hard with a name.  While the
    system is UNSAT: record the round's core union, keep members tracing to
    statutory constraints (and the penalty pin) as illegal terms, then drop
    the factual core members so their variables become free, and re-check.
    Terminates in at most |soft| + 1 rounds since every UNSAT round drops a
    factual member or halts on a law-only core.
    """
    bundle = _checked(bundle)
    cfg = cfg or default_config()
    soft_ids = {c.id for c in bundle.soft()}
    exact = len(bundle.constraints) + 1 <= EXACT_CORE_UNION_LIMIT

    start = time.monotonic()
    dropped: set[str] = set()
    rounds: list[tuple[str, ...]] = []
    term_order: list[str] = []
    term_members: dict[str, list[str]] = {}
    sat_reached = False
    memo: dict = {}

    for round_no in range(len(soft_ids) + 1):
        if exact:
            if frozenset(dropped) not in memo:
                memo[frozenset(dropped)] = _minimal_core_of(bundle, dropped, cfg)
            status, _, _ = memo[frozenset(dropped)]
            core_entries = {} if status == SAT else _all_cores_union(
                bundle, dropped, cfg, memo)
        else:
            status, core_ids, entries = _minimal_core_of(bundle, dropped, cfg)
            core_entries = dict(zip(core_ids, (entries[c] for c in core_ids)))
        if status == SAT:
            if round_no == 0:
                raise PreconditionError(
                    "case illegality check is satisfiable; nothing to enumerate")
            sat_reached = True
            break
        rounds.append(tuple(core_entries))
        round_soft = []
        for cid, entry in core_entries.items():
            if entry.origin == "soft":
                round_soft.append(cid)
            else:
                if entry.group not in term_members:
                    term_order.append(entry.group)
                    term_members[entry.group] = []
                if cid not in term_members[entry.group]:
                    term_members[entry.group].append(cid)
        if not round_soft:
            # law-only conflict under the penalty pin: statutory obligations
            # are immutable, so report the core as terminal rather than loop
            break
        dropped.update(round_soft)

    terms = tuple(TermGroup(g, tuple(term_members[g])) for g in term_order)
    return IllegalTermReport(
        terms=terms,
        rounds=tuple(rounds),
        sat_reached=sat_reached,
        elapsed_ms=(time.monotonic() - start) * 1000.0,
    )
