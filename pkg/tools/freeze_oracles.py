#!/usr/bin/env python3
"""Regenerate the frozen oracle fixtures under fixtures/oracle/.

The MaxSMT optimality oracle enumerates all 2^|soft| relaxation subsets of
each seeded bundle and records the minimum feasible violation weight (null
when even relaxing everything stays unsatisfiable).  Feasibility of each
subset is decided by the reference solver run in-process; the engine under
test later reaches the same backend only through the SMT-LIB child-process
path, so the two sides share arithmetic but not plumbing.

Run from the repository root:

    python tools/freeze_oracles.py
"""

import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lexverify import refsolver
from lexverify.gencases import GenParams, generate_cases
from lexverify.smtlib import EmitOptions, MODE_HARDENED, emit_script

ORACLE_SEED = 2024
ORACLE_COUNT = 50
ORACLE_PARAMS = GenParams(max_soft=8, max_constraints=20,
                          weight_low=1, weight_high=5, perturb_rate=0.3)


def brute_force_min_cost(bundle):
    """Minimum total weight over all keep-subsets whose hardened system is
    satisfiable; None when no subset (not even the empty one) is."""
    softs = bundle.soft()
    best = None
    for keep_mask in range(2 ** len(softs)):
        drop = frozenset(softs[i].id for i in range(len(softs))
                         if not (keep_mask >> i) & 1)
        cost = sum((c.weight or 1) for c in softs if c.id in drop)
        if best is not None and cost >= best:
            continue
        script = emit_script(bundle, MODE_HARDENED, EmitOptions(exclude_ids=drop))
        text = script.text.replace("(get-unsat-core)\n", "").replace("(get-model)\n", "")
        if refsolver.solve_text(text).strip().splitlines()[0] == "sat":
            best = cost
    return best


def main():
    root = Path(__file__).resolve().parent.parent
    out_path = root / "fixtures" / "oracle" / "maxsmt_min_costs.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)

    bundles = generate_cases(ORACLE_COUNT, ORACLE_SEED, ORACLE_PARAMS)
    entries = {}
    t0 = time.time()
    for b in bundles:
        cost = brute_force_min_cost(b)
        entries[b.case_id] = cost
        print(f"{b.case_id}: softs={len(b.soft())} min_cost={cost}")
    payload = {
        "seed": ORACLE_SEED,
        "count": ORACLE_COUNT,
        "params": {
            "max_soft": ORACLE_PARAMS.max_soft,
            "max_constraints": ORACLE_PARAMS.max_constraints,
            "weight_low": ORACLE_PARAMS.weight_low,
            "weight_high": ORACLE_PARAMS.weight_high,
            "perturb_rate": ORACLE_PARAMS.perturb_rate,
        },
        "min_costs": entries,
    }
    out_path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"froze {len(entries)} oracle values to {out_path} "
          f"in {time.time()-t0:.1f}s")


if __name__ == "__main__":
    main()
