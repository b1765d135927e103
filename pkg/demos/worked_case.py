#!/usr/bin/env python3
"""Walk the worked insurance-enforcement case end to end.

The case: an insurer's capital adequacy ratio of 111.09% puts it at
supervisory capital level 3.  It submitted a capital improvement plan but
never executed it, so the level-3 measures are incomplete and a penalty
follows.  The engine certifies that, names the conflicting statutory units,
and computes the cheapest factual revision that restores legality.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lexverify.bundle import free_variables, validate_bundle
from lexverify.cases import load_fsc_fixture
from lexverify.maxsmt import STRATEGY_CORE, STRATEGY_LINEAR, minimize_violation, render_trace
from lexverify.verify import check_case_illegality, check_law_consistency, enumerate_illegal_terms

bundle = load_fsc_fixture()
print(f"case: {bundle.case_id}")
print(f"  {len(bundle.vars)} variables, {len(bundle.hard())} statutory constraints, "
      f"{len(bundle.soft())} weighted facts")
assert validate_bundle(bundle) == []

print("\nfacts on record:")
for name, value in bundle.facts.items():
    print(f"  {name} = {value}")
print(f"left free (unreported): {sorted(free_variables(bundle))}")

law = check_law_consistency(bundle)
print(f"\nlaw consistency: {law.status}  "
      "(the statutory encoding is internally coherent)")

case = check_case_illegality(bundle)
print(f"case illegality: {case.status}  "
      "(no lawful valuation is compatible with the recorded facts)")
print("unsat core groups:")
for group in case.core_groups:
    members = [cid for cid in case.core_ids]
    print(f"  {group}")

report = enumerate_illegal_terms(bundle)
print("\nillegal terms (statutory units involved in the violation):")
for term in report.terms:
    print(f"  {term.group}: {', '.join(term.constraint_ids)}")
print(f"rounds used: {len(report.rounds)}, satisfiable after dropping facts: "
      f"{report.sat_reached}")

for strategy in (STRATEGY_LINEAR, STRATEGY_CORE):
    result = minimize_violation(bundle, strategy=strategy)
    print(f"\nminimal correction via {strategy}: cost {result.cost} "
          f"({result.checks_performed} solver checks)")
    for line in render_trace(result, bundle):
        print(f"  -> {line}")
