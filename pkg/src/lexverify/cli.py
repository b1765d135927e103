"""Command-line frontend over the library; no service required.

Every command is a thin shell over a library operation, prints machine
readable JSON on stdout (``--pretty`` for humans) and diagnostics on stderr,
and maps outcomes onto stable exit codes scripts can branch on:

    0  success, or a verdict matching expectation
    1  usage or validation error
    2  verdict contrary to expectation (e.g. illegality check came back sat)
    3  solver failure or timeout
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bundle import bundle_to_json, load_bundle, validate_bundle
from .cases import load_fsc_fixture
from .gateway import (
    HttpCompletionPort,
    LLM_KEY_ENV,
    MockCompletionPort,
    SynthesisExhausted,
    synthesize_bundle,
)
from .gencases import GenParams, generate_cases
from .legalparse import (
    articles_to_json,
    default_patterns,
    extract_articles,
    patterns_from_config,
)
from .maxsmt import (
    NoFeasibleCompliance,
    STRATEGY_CORE,
    STRATEGY_LINEAR,
    minimize_violation,
    render_trace,
    result_to_json,
)
from .retrieval import hybrid_search, index_build, load_corpus
from .solver import SolverCrash, SolverTimeout, config_from_path
from .verify import (
    InvalidBundle,
    PreconditionError,
    check_case_illegality,
    check_law_consistency,
    enumerate_illegal_terms,
    report_to_json,
    verdict_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNEXPECTED_VERDICT = 2
EXIT_SOLVER_FAILURE = 3

BIND_ENV = "LEXV_BIND"

_STRATEGIES = {"linear": STRATEGY_LINEAR, "core": STRATEGY_CORE}


def _emit(obj, pretty: bool):
    if pretty:
        json.dump(obj, sys.stdout, indent=2, ensure_ascii=False)
    else:
        json.dump(obj, sys.stdout, ensure_ascii=False)
    sys.stdout.write("\n")


def _diag(msg: str):
    print(msg, file=sys.stderr)


def _read_bundle(path: str):
    if path == "fixture:fsc":
        return load_fsc_fixture()
    return load_bundle(Path(path).read_text())


def _solver_cfg(args):
    return config_from_path(getattr(args, "solver", None),
                            timeout_ms=getattr(args, "timeout_ms", 10_000))


def _llm_port(args):
    if getattr(args, "llm", "mock") == "live":
        endpoint = getattr(args, "llm_endpoint", None)
        model = getattr(args, "llm_model", None)
        if not endpoint or not model:
            raise SystemExit("--llm live needs --llm-endpoint and --llm-model")
        return HttpCompletionPort(endpoint=endpoint, model=model,
                                  api_key=os.environ.get(LLM_KEY_ENV, ""))
    return MockCompletionPort()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    bundle = _read_bundle(args.bundle)
    errors = validate_bundle(bundle)
    _emit({"valid": not errors, "errors": [str(e) for e in errors]}, args.pretty)
    return EXIT_OK if not errors else EXIT_USAGE


def cmd_check_law(args) -> int:
    verdict = check_law_consistency(_read_bundle(args.bundle), _solver_cfg(args))
    _emit(verdict_to_json(verdict), args.pretty)
    if verdict.status == "sat":
        return EXIT_OK
    if verdict.status == "unsat":
        _diag("law base is inconsistent; core identifies the conflict")
        return EXIT_UNEXPECTED_VERDICT
    return EXIT_SOLVER_FAILURE


def cmd_check_case(args) -> int:
    verdict = check_case_illegality(_read_bundle(args.bundle), _solver_cfg(args))
    _emit(verdict_to_json(verdict), args.pretty)
    if verdict.status == "unsat":
        return EXIT_OK
    if verdict.status == "sat":
        _diag("facts are consistent with a lawful outcome; no violation captured")
        return EXIT_UNEXPECTED_VERDICT
    return EXIT_SOLVER_FAILURE


def cmd_illegal_terms(args) -> int:
    report = enumerate_illegal_terms(_read_bundle(args.bundle), _solver_cfg(args))
    _emit(report_to_json(report), args.pretty)
    return EXIT_OK


def cmd_optimize(args) -> int:
    override = {}
    for spec in args.weight_override or ():
        key, _, mult = spec.partition("=")
        if not mult.isdigit() or int(mult) < 1:
            raise SystemExit(f"bad --weight-override {spec!r}; use id=positive_int")
        override[key] = int(mult)
    bundle = _read_bundle(args.bundle)
    try:
        result = minimize_violation(bundle, strategy=_STRATEGIES[args.strategy],
                                    weights_override=override, cfg=_solver_cfg(args))
    except NoFeasibleCompliance as exc:
        _emit({"feasible": False, "reason": str(exc)}, args.pretty)
        return EXIT_UNEXPECTED_VERDICT
    out = result_to_json(result)
    out["feasible"] = True
    out["trace"] = list(render_trace(result, bundle).lines)
    _emit(out, args.pretty)
    return EXIT_OK


def cmd_extract_articles(args) -> int:
    text = Path(args.file).read_text()
    if args.patterns:
        patterns = patterns_from_config(json.loads(Path(args.patterns).read_text()))
    else:
        patterns = default_patterns(args.lang)
    amap = extract_articles(text, patterns)
    _emit(articles_to_json(amap), args.pretty)
    return EXIT_OK


def cmd_search(args) -> int:
    docs = load_corpus(Path(args.corpus).read_text())
    index = index_build(docs)
    hits = hybrid_search(index, args.query, args.k, args.alpha)
    _emit({"hits": [
        {"doc_id": h.doc_id, "bm25": h.bm25, "sim_vec": h.sim_vec, "hybrid": h.hybrid}
        for h in hits
    ]}, args.pretty)
    return EXIT_OK


def cmd_expand(args) -> int:
    from .retrieval import ExpansionPorts, OverlapReranker, expand_article
    from .gateway import filter_useful, gen_queries

    docs = load_corpus(Path(args.corpus).read_text())
    index = index_build(docs)
    if args.article_id not in index.by_id:
        raise SystemExit(f"unknown article id {args.article_id!r}")
    port = _llm_port(args)

    class _QueryGen:
        def queries(self, base):
            return gen_queries(base, port)

    class _Filter:
        def filter_useful(self, docs, base):
            return filter_useful(docs, base, port)

    ports = ExpansionPorts(query_gen=_QueryGen(), reranker=OverlapReranker(),
                           filter=_Filter())
    supplementary = expand_article(index.doc(args.article_id), index, ports,
                                   alpha=args.alpha, k=args.k)
    _emit({"supplementary": [d.doc_id for d in supplementary]}, args.pretty)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    case_text = Path(args.case).read_text()
    articles = json.loads(Path(args.articles).read_text()) if args.articles else \
        {"articles": {}, "diagnostics": {}}
    port = _llm_port(args)
    try:
        bundle, attempts = synthesize_bundle(case_text, articles, port,
                                             max_repair_rounds=args.max_repair_rounds,
                                             cfg=_solver_cfg(args))
    except SynthesisExhausted as exc:
        _emit({"synthesized": False,
               "attempts": [{"index": a.index, "error": a.error} for a in exc.attempts]},
              args.pretty)
        return EXIT_UNEXPECTED_VERDICT
    payload = {
        "synthesized": True,
        "bundle": bundle_to_json(bundle),
        "attempts": [{"index": a.index, "error": a.error} for a in attempts],
    }
    if args.review:
        _diag(json.dumps(bundle_to_json(bundle), indent=2, ensure_ascii=False))
        _diag("review: persist this bundle? [y/N]")
        answer = sys.stdin.readline().strip().lower()
        if answer not in ("y", "yes"):
            _emit({"synthesized": True, "persisted": False}, args.pretty)
            return EXIT_OK
    if args.store:
        from .store import CaseStore

        record = CaseStore(args.store).put_case(bundle, actor="cli")
        payload["persisted"] = {"case_id": record.case_id, "version": record.version}
    _emit(payload, args.pretty)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import CaseStore

    corpus = load_corpus(Path(args.corpus).read_text()) if args.corpus else []
    app = create_app(
        CaseStore(args.store),
        solver_cfg=_solver_cfg(args),
        llm_port=_llm_port(args),
        corpus=corpus,
        static_dir=args.ui,
        allow_origins=args.allow_origin or None,
    )
    bind = args.bind or os.environ.get(BIND_ENV, "127.0.0.1:8421")
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8421),
                log_level="warning")
    return EXIT_OK


def cmd_gen_cases(args) -> int:
    params = GenParams(weight_low=args.weight_low, weight_high=args.weight_high,
                       max_soft=args.max_soft)
    for bundle in generate_cases(args.n, args.seed, params):
        sys.stdout.write(json.dumps(bundle_to_json(bundle), ensure_ascii=False) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lexverify",
        description="Compliance verification: statutes as hard constraints, "
                    "facts as weighted soft constraints.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver=True):
        sp.add_argument("--pretty", action="store_true", help="indent JSON output")
        if solver:
            sp.add_argument("--solver", help="solver executable (default: bundled; "
                                             "env LEXV_SOLVER)")
            sp.add_argument("--timeout-ms", type=int, default=10_000)

    sp = sub.add_parser("validate", help="check a bundle against the format invariants")
    sp.add_argument("bundle")
    common(sp, solver=False)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("check-law", help="law base consistency (expects sat)")
    sp.add_argument("bundle")
    common(sp)
    sp.set_defaults(fn=cmd_check_law)

    sp = sub.add_parser("check-case", help="case illegality (expects unsat + core)")
    sp.add_argument("bundle")
    common(sp)
    sp.set_defaults(fn=cmd_check_case)

    sp = sub.add_parser("illegal-terms", help="enumerate statutory units in conflict")
    sp.add_argument("bundle")
    common(sp)
    sp.set_defaults(fn=cmd_illegal_terms)

    sp = sub.add_parser("optimize", help="minimal factual revision restoring legality")
    sp.add_argument("bundle")
    sp.add_argument("--strategy", choices=sorted(_STRATEGIES), default="linear")
    sp.add_argument("--weight-override", action="append", metavar="ID=MULT")
    common(sp)
    sp.set_defaults(fn=cmd_optimize)

    sp = sub.add_parser("extract-articles", help="parse raw legal text into articles")
    sp.add_argument("file")
    sp.add_argument("--lang", choices=["en", "zh"], default="en")
    sp.add_argument("--patterns", help="JSON file overriding the default patterns")
    common(sp, solver=False)
    sp.set_defaults(fn=cmd_extract_articles)

    sp = sub.add_parser("search", help="hybrid lexical/semantic search over a corpus")
    sp.add_argument("query")
    sp.add_argument("--corpus", required=True, help="JSONL corpus file")
    sp.add_argument("--alpha", type=float, default=0.8)
    sp.add_argument("-k", type=int, default=10)
    common(sp, solver=False)
    sp.set_defaults(fn=cmd_search)

    sp = sub.add_parser("expand", help="supplementary article expansion")
    sp.add_argument("article_id")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--alpha", type=float, default=0.8)
    sp.add_argument("-k", type=int, default=10)
    sp.add_argument("--llm", choices=["mock", "live"], default="mock")
    sp.add_argument("--llm-endpoint")
    sp.add_argument("--llm-model")
    common(sp, solver=False)
    sp.set_defaults(fn=cmd_expand)

    sp = sub.add_parser("synthesize", help="case text + articles -> constraint bundle")
    sp.add_argument("case")
    sp.add_argument("--articles", help="ArticleMap JSON file")
    sp.add_argument("--llm", choices=["mock", "live"], default="mock")
    sp.add_argument("--llm-endpoint")
    sp.add_argument("--llm-model")
    sp.add_argument("--max-repair-rounds", type=int, default=3)
    sp.add_argument("--review", action="store_true",
                    help="print the bundle and confirm before persisting")
    sp.add_argument("--store", help="persist the accepted bundle to this store")
    common(sp)
    sp.set_defaults(fn=cmd_synthesize)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--store", required=True)
    sp.add_argument("--bind", help=f"host:port (env {BIND_ENV})")
    sp.add_argument("--corpus")
    sp.add_argument("--ui", help="static UI directory to serve")
    sp.add_argument("--allow-origin", action="append")
    sp.add_argument("--llm", choices=["mock", "live"], default="mock")
    sp.add_argument("--llm-endpoint")
    sp.add_argument("--llm-model")
    common(sp)
    sp.set_defaults(fn=cmd_serve)

    sp = sub.add_parser("gen-cases", help="emit synthetic bundles (JSONL on stdout)")
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--weight-low", type=int, default=1)
    sp.add_argument("--weight-high", type=int, default=1)
    sp.add_argument("--max-soft", type=int)
    common(sp, solver=False)
    sp.set_defaults(fn=cmd_gen_cases)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvalidBundle as exc:
        _emit({"valid": False, "errors": [str(e) for e in exc.errors]}, args.pretty)
        return EXIT_USAGE
    except (FileNotFoundError, json.JSONDecodeError, SystemExit) as exc:
        if isinstance(exc, SystemExit):
            raise
        _diag(f"error: {exc}")
        return EXIT_USAGE
    except PreconditionError as exc:
        _diag(f"precondition: {exc}")
        return EXIT_UNEXPECTED_VERDICT
    except SolverTimeout as exc:
        _diag(f"solver timeout: {exc}")
        return EXIT_SOLVER_FAILURE
    except SolverCrash as exc:
        _diag(f"solver crash: {exc}")
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
