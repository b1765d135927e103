"""Compliance verification engine.

Statutes become hard logical constraints, case facts weighted soft
constraints; violations are detected through unsatisfiability-core analysis
and the minimal factual revision restoring legality is computed via weighted
MaxSMT.  Retrieval, parsing, synthesis, persistence, an HTTP service and a
CLI wrap the core.
"""

from .bundle import (
    Assignment,
    Constraint,
    ConstraintBundle,
    HARD,
    SOFT,
    ValidationError,
    VarDecl,
    bundle_from_json,
    bundle_to_json,
    dump_bundle,
    free_variables,
    load_bundle,
    validate_bundle,
)
from .exprs import Expr, Sort, eval_expr, parse_expr
from .maxsmt import (
    CorrectionResult,
    CorrectionTrace,
    NoFeasibleCompliance,
    STRATEGY_CORE,
    STRATEGY_LINEAR,
    minimize_violation,
    render_trace,
)
from .smtlib import EmitOptions, SmtScript, SolverReply, emit_script, parse_reply
from .solver import SolverConfig, default_config, probe_solver, run_check
from .verify import (
    IllegalTermReport,
    Verdict,
    check_case_illegality,
    check_law_consistency,
    enumerate_illegal_terms,
)

__version__ = "0.1.0"
