"""HTTP service for interactive what-if compliance analysis.

The service is the one backend both the CLI (`lexverify serve`) and the
browser UI drive.  Case mutations go through optimistic versioning in the
store; what-if edits live in server-side sessions and touch the stored case
only on explicit commit, so the persisted history reflects deliberate
changes only.

Status mapping: 400 malformed request, 404 unknown case/session, 409 version
conflict, 422 bundle validation failure, 504 solver timeout (with the best
certified bound when one exists).
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .bundle import (
    Constraint,
    ConstraintBundle,
    HARD,
    SOFT,
    VarDecl,
    bundle_from_json,
    bundle_to_json,
    validate_bundle,
)
from .cases import value_expr
from .exprs import ExprError, Sort, value_from_json
from .gateway import (
    CompletionPort,
    MockCompletionPort,
    SynthesisExhausted,
    gen_queries,
    synthesize_bundle,
)
from .maxsmt import (
    NoFeasibleCompliance,
    STRATEGY_CORE,
    STRATEGY_LINEAR,
    minimize_violation,
    render_trace,
    result_to_json,
)
from .retrieval import (
    AcceptAllFilter,
    Doc,
    ExpansionPorts,
    HashedEmbedder,
    Index,
    OverlapReranker,
    hybrid_search,
    index_build,
)
from .solver import SolverConfig, SolverTimeout, default_config
from .store import CaseStore, NotFound, VersionConflict
from .verify import (
    InvalidBundle,
    PreconditionError,
    check_case_illegality,
    check_law_consistency,
    enumerate_illegal_terms,
    report_to_json,
    verdict_to_json,
)


@dataclass
class WhatIfSession:
    session_id: str
    case_id: str
    base_version: int
    bundle: ConstraintBundle
    base_bundle_json: dict = field(default_factory=dict)
    applied: list[dict] = field(default_factory=list)
    results: list[dict] = field(default_factory=list)

    @property
    def working_version(self) -> int:
        return len(self.applied)


class _GatewayQueryGen:
    def __init__(self, port: CompletionPort):
        self.port = port

    def queries(self, base: Doc) -> list[str]:
        return gen_queries(base, self.port)


class _GatewayFilter:
    def __init__(self, port: CompletionPort):
        self.port = port

    def filter_useful(self, docs, base):
        from .gateway import filter_useful

        return filter_useful(docs, base, self.port)


def create_app(store: CaseStore,
               solver_cfg: SolverConfig | None = None,
               llm_port: CompletionPort | None = None,
               corpus: list[Doc] | None = None,
               static_dir: str | Path | None = None,
               allow_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="lexverify", docs_url=None, redoc_url=None)
    cfg = solver_cfg or default_config()
    port = llm_port or MockCompletionPort()
    index: Index = index_build(corpus or [], HashedEmbedder())
    sessions: dict[str, WhatIfSession] = {}

    if allow_origins:
        app.add_middleware(CORSMiddleware, allow_origins=allow_origins,
                           allow_methods=["*"], allow_headers=["*"])

    # -- helpers -------------------------------------------------------------

    def _require(body: Any, key: str, kind=None):
        if not isinstance(body, dict) or key not in body:
            raise HTTPException(400, f"missing field {key!r}")
        value = body[key]
        if kind is not None and not isinstance(value, kind):
            raise HTTPException(400, f"field {key!r} has wrong type")
        return value

    def _load_bundle(obj: Any) -> ConstraintBundle:
        try:
            bundle = bundle_from_json(obj)
        except (ExprError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed bundle: {exc}") from exc
        issues = validate_bundle(bundle)
        if issues:
            raise HTTPException(422, {"validation_errors": [str(e) for e in issues]})
        return bundle

    def _get_record(case_id: str):
        try:
            return store.get_case(case_id)
        except NotFound:
            raise HTTPException(404, f"unknown case {case_id!r}") from None

    def _get_session(sid: str) -> WhatIfSession:
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid!r}")
        return sessions[sid]

    def _run_guarded(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SolverTimeout as exc:
            raise HTTPException(504, {"error": "solver timeout",
                                      "best_bound": exc.best_bound}) from exc
        except PreconditionError as exc:
            raise HTTPException(409, str(exc)) from exc
        except InvalidBundle as exc:
            raise HTTPException(422, {"validation_errors": [str(e) for e in exc.errors]}) from exc

    def _record_json(rec) -> dict:
        return {
            "case_id": rec.case_id,
            "version": rec.version,
            "bundle": bundle_to_json(rec.bundle),
            "results": rec.results,
            "history": [
                {"version": h.version, "ts": h.ts, "actor": h.actor,
                 "operation": h.operation}
                for h in rec.history
            ],
        }

    # -- cases ----------------------------------------------------------------

    @app.post("/cases")
    def post_case(body: dict = Body(...)):
        bundle = _load_bundle(_require(body, "bundle", dict))
        expected = body.get("expected_version")
        try:
            rec = store.put_case(bundle, expected_version=expected,
                                 actor=body.get("actor", "api"))
        except VersionConflict as exc:
            raise HTTPException(409, str(exc)) from None
        return {"case_id": rec.case_id, "version": rec.version}

    @app.get("/cases")
    def list_cases():
        return {"cases": [{"case_id": r.case_id, "version": r.version,
                           "title": r.bundle.meta.get("title", "")}
                          for r in store.list_cases()]}

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        return _record_json(_get_record(case_id))

    @app.post("/cases/{case_id}/check/consistency")
    def case_consistency(case_id: str):
        rec = _get_record(case_id)
        verdict = _run_guarded(check_law_consistency, rec.bundle, cfg)
        payload = verdict_to_json(verdict)
        store.record_result(case_id, "consistency", payload)
        return payload

    @app.post("/cases/{case_id}/check/illegality")
    def case_illegality(case_id: str):
        rec = _get_record(case_id)
        verdict = _run_guarded(check_case_illegality, rec.bundle, cfg)
        payload = verdict_to_json(verdict)
        store.record_result(case_id, "illegality", payload)
        return payload

    @app.post("/cases/{case_id}/illegal-terms")
    def case_illegal_terms(case_id: str):
        rec = _get_record(case_id)
        report = _run_guarded(enumerate_illegal_terms, rec.bundle, cfg)
        payload = report_to_json(report)
        store.record_result(case_id, "illegal_terms", payload)
        return payload

    @app.post("/cases/{case_id}/optimize")
    def case_optimize(case_id: str, body: dict = Body(default={})):
        rec = _get_record(case_id)
        payload = _optimize(rec.bundle, body or {})
        store.record_result(case_id, "optimize", payload)
        return payload

    def _optimize(bundle: ConstraintBundle, body: dict) -> dict:
        strategy = body.get("strategy", STRATEGY_LINEAR)
        if strategy not in (STRATEGY_LINEAR, STRATEGY_CORE):
            raise HTTPException(400, f"unknown strategy {strategy!r}")
        override = body.get("weights_override") or {}
        if not isinstance(override, dict) or not all(
                isinstance(v, int) and v >= 1 for v in override.values()):
            raise HTTPException(400, "weights_override must map ids to positive integers")
        try:
            result = minimize_violation(bundle, strategy=strategy,
                                        weights_override=override, cfg=cfg)
        except NoFeasibleCompliance as exc:
            return {"feasible": False, "reason": str(exc)}
        except SolverTimeout as exc:
            raise HTTPException(504, {"error": "solver timeout",
                                      "best_bound": exc.best_bound}) from exc
        except InvalidBundle as exc:
            raise HTTPException(422, {"validation_errors": [str(e) for e in exc.errors]}) from exc
        trace = render_trace(result, bundle)
        out = result_to_json(result)
        out["feasible"] = True
        out["trace"] = list(trace.lines)
        return out

    # -- sessions ---------------------------------------------------------------

    @app.post("/sessions")
    def open_session(body: dict = Body(...)):
        case_id = _require(body, "case_id", str)
        rec = _get_record(case_id)
        sid = secrets.token_hex(8)
        sessions[sid] = WhatIfSession(session_id=sid, case_id=case_id,
                                      base_version=rec.version, bundle=rec.bundle,
                                      base_bundle_json=bundle_to_json(rec.bundle))
        return {"session_id": sid, "case_id": case_id, "base_version": rec.version}

    @app.delete("/sessions/{sid}")
    def drop_session(sid: str):
        _get_session(sid)
        del sessions[sid]
        return {"dropped": sid}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        s = _get_session(sid)
        return {
            "session_id": s.session_id,
            "case_id": s.case_id,
            "base_version": s.base_version,
            "working_version": s.working_version,
            "bundle": bundle_to_json(s.bundle),
            "applied": s.applied,
            "results": s.results,
        }

    @app.post("/sessions/{sid}/modify")
    def modify_session(sid: str, body: dict = Body(...)):
        s = _get_session(sid)
        expected = _require(body, "expected_version", int)
        if expected != s.working_version:
            raise HTTPException(409, f"session at working version {s.working_version}, "
                                     f"request expected {expected}")
        target = _require(body, "target", str)
        action = _require(body, "action", dict)
        new_bundle = _apply_modify(s.bundle, target, action)
        issues = validate_bundle(new_bundle)
        if issues:
            raise HTTPException(422, {"validation_errors": [str(e) for e in issues]})
        s.bundle = new_bundle
        s.applied.append({"target": target, "action": action,
                          "working_version": s.working_version + 1})
        return {"working_version": s.working_version,
                "bundle": bundle_to_json(s.bundle)}

    @app.post("/sessions/{sid}/run/{operation}")
    def run_session(sid: str, operation: str, body: dict = Body(default={})):
        s = _get_session(sid)
        if operation == "check":
            verdict = _run_guarded(check_case_illegality, s.bundle, cfg)
            payload = {"operation": "check", **verdict_to_json(verdict)}
        elif operation == "optimize":
            payload = {"operation": "optimize", **_optimize(s.bundle, body or {})}
        else:
            raise HTTPException(400, f"unknown operation {operation!r}; use check|optimize")
        payload["working_version"] = s.working_version
        s.results.append(payload)
        return payload

    @app.post("/sessions/{sid}/commit")
    def commit_session(sid: str, body: dict = Body(default={})):
        s = _get_session(sid)
        actor = (body or {}).get("actor", "session")
        expected = s.base_version
        current = _get_record(s.case_id)
        if current.version != expected:
            # recorded results bump the version without touching the bundle;
            # rebase silently in that case, conflict on real bundle drift
            if bundle_to_json(current.bundle) == s.base_bundle_json:
                expected = current.version
            else:
                raise HTTPException(
                    409, f"case {s.case_id!r} changed since the session opened "
                         f"(v{s.base_version} -> v{current.version}); reload and reapply")
        try:
            rec = store.put_case(s.bundle, expected_version=expected, actor=actor)
        except VersionConflict as exc:
            raise HTTPException(409, str(exc)) from None
        s.base_version = rec.version
        s.base_bundle_json = bundle_to_json(rec.bundle)
        s.applied.clear()
        return {"case_id": s.case_id, "version": rec.version}

    # -- retrieval ---------------------------------------------------------------

    @app.post("/retrieval/search")
    def retrieval_search(body: dict = Body(...)):
        query = _require(body, "query", str)
        k = body.get("k", 10)
        alpha = body.get("alpha", 0.8)
        if not isinstance(k, int) or k < 1:
            raise HTTPException(400, "k must be a positive integer")
        if not isinstance(alpha, (int, float)) or not 0 <= alpha <= 1:
            raise HTTPException(400, "alpha must lie in [0, 1]")
        hits = hybrid_search(index, query, k, float(alpha))
        return {"hits": [
            {"doc_id": h.doc_id, "bm25": h.bm25, "sim_vec": h.sim_vec,
             "hybrid": h.hybrid, "text": index.doc(h.doc_id).text,
             "law": index.doc(h.doc_id).law, "article": index.doc(h.doc_id).article}
            for h in hits
        ]}

    @app.post("/retrieval/expand")
    def retrieval_expand(body: dict = Body(...)):
        from .retrieval import expand_article

        article_id = _require(body, "article_id", str)
        if article_id not in index.by_id:
            raise HTTPException(404, f"unknown article {article_id!r}")
        k = body.get("k", 10)
        alpha = body.get("alpha", 0.8)
        ports = ExpansionPorts(query_gen=_GatewayQueryGen(port),
                               reranker=OverlapReranker(),
                               filter=_GatewayFilter(port))
        docs = expand_article(index.doc(article_id), index, ports,
                              alpha=float(alpha), k=int(k))
        return {"supplementary": [
            {"doc_id": d.doc_id, "text": d.text, "law": d.law, "article": d.article}
            for d in docs
        ]}

    # -- synthesis ----------------------------------------------------------------

    @app.post("/synthesize")
    def synthesize(body: dict = Body(...)):
        case_text = _require(body, "case_text", str)
        article_ids = body.get("article_ids", [])
        articles = {"articles": {}, "diagnostics": {}}
        for aid in article_ids:
            if aid not in index.by_id:
                raise HTTPException(404, f"unknown article {aid!r}")
            d = index.doc(aid)
            articles["articles"][aid] = {"title": d.law or aid, "clauses": [],
                                         "content": d.text}
        try:
            bundle, attempts = synthesize_bundle(case_text, articles, port, cfg=cfg)
        except SynthesisExhausted as exc:
            return JSONResponse(status_code=422, content={
                "error": "synthesis exhausted",
                "attempts": [{"index": a.index, "error": a.error} for a in exc.attempts],
            })
        return {
            "bundle": bundle_to_json(bundle),
            "attempts": [{"index": a.index, "error": a.error} for a in attempts],
        }

    # -- schema & UI -----------------------------------------------------------------

    @app.get("/schema")
    def schema():
        return _SCHEMA

    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

        @app.get("/")
        def root():
            return FileResponse(Path(static_dir) / "index.html")

    return app


def _apply_modify(bundle: ConstraintBundle, target: str, action: dict) -> ConstraintBundle:
    kind = action.get("type")
    sorts = bundle.var_sorts()
    constraint_ids = {c.id for c in bundle.constraints}

    if kind == "toggle":
        if target in sorts:
            if sorts[target] is not Sort.BOOL:
                raise HTTPException(400, f"toggle needs a BOOL variable, {target!r} is "
                                         f"{sorts[target].value}")
            old = bundle.facts.get(target)
            if old is None:
                raise HTTPException(400, f"variable {target!r} has no recorded fact to toggle")
            return _set_fact(bundle, target, not old)
        if target in constraint_ids:
            return _flip_kind(bundle, target)
        raise HTTPException(404, f"unknown toggle target {target!r}")

    if kind == "fix_value":
        if target not in sorts:
            raise HTTPException(404, f"unknown variable {target!r}")
        try:
            value = value_from_json(action.get("value"))
        except ExprError as exc:
            raise HTTPException(400, str(exc)) from None
        if not _sort_ok(value, sorts[target]):
            raise HTTPException(400, f"value {action.get('value')!r} does not match sort "
                                     f"{sorts[target].value} of {target!r}")
        return _set_fact(bundle, target, value)

    if kind == "inject_parameter":
        name = action.get("name")
        if not isinstance(name, str) or not name:
            raise HTTPException(400, "inject_parameter needs a name")
        if name in sorts:
            raise HTTPException(400, f"variable {name!r} already declared")
        try:
            sort = Sort(action.get("sort", ""))
            value = value_from_json(action.get("value"))
        except (ValueError, ExprError) as exc:
            raise HTTPException(400, str(exc)) from None
        if not _sort_ok(value, sort):
            raise HTTPException(400, "injected value does not match its sort")
        new_vars = (*bundle.vars, VarDecl(name, sort, "facts:injected"))
        return _set_fact(bundle.with_vars(new_vars), name, value)

    if kind == "set_weight":
        if target not in constraint_ids:
            raise HTTPException(404, f"unknown constraint {target!r}")
        w = action.get("weight")
        if not isinstance(w, int) or w < 1:
            raise HTTPException(400, "weight must be a positive integer")
        out = []
        for c in bundle.constraints:
            if c.id == target:
                if c.kind != SOFT:
                    raise HTTPException(400, f"constraint {target!r} is hard; "
                                             "only soft constraints carry weights")
                c = replace(c, weight=w)
            out.append(c)
        return bundle.with_constraints(out)

    if kind == "set_kind":
        if target not in constraint_ids:
            raise HTTPException(404, f"unknown constraint {target!r}")
        desired = action.get("kind")
        if desired not in (HARD, SOFT):
            raise HTTPException(400, "kind must be 'hard' or 'soft'")
        out = []
        for c in bundle.constraints:
            if c.id == target and c.kind != desired:
                c = replace(c, kind=desired,
                            weight=1 if desired == SOFT else None)
            out.append(c)
        return bundle.with_constraints(out)

    raise HTTPException(400, f"unknown action type {kind!r}")


def _sort_ok(value, sort: Sort) -> bool:
    from fractions import Fraction

    if sort is Sort.BOOL:
        return isinstance(value, bool)
    if sort is Sort.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _flip_kind(bundle: ConstraintBundle, cid: str) -> ConstraintBundle:
    out = []
    for c in bundle.constraints:
        if c.id == cid:
            if c.kind == HARD:
                c = replace(c, kind=SOFT, weight=1)
            else:
                c = replace(c, kind=HARD, weight=None)
        out.append(c)
    return bundle.with_constraints(out)


def _set_fact(bundle: ConstraintBundle, name: str, value) -> ConstraintBundle:
    """Update the facts map and any soft equality pin on the variable."""
    from .exprs import Expr

    sorts = bundle.var_sorts()
    facts = dict(bundle.facts)
    facts[name] = value
    out = []
    pinned = False
    for c in bundle.constraints:
        if (c.kind == SOFT and c.expr.op == "=" and c.expr.args[0].op == "var"
                and c.expr.args[0].value == name):
            c = replace(c, expr=Expr("=", (c.expr.args[0],
                                           value_expr(value, sorts[name]))))
            pinned = True
        out.append(c)
    if not pinned:
        groups = {v.name: v.group for v in bundle.vars}
        out.append(Constraint(
            id=f"fact_{name}", kind=SOFT,
            expr=Expr("=", (Expr.var(name), value_expr(value, sorts[name]))),
            group=groups.get(name, ""), weight=1))
    return bundle.with_facts(facts).with_constraints(out)


_SCHEMA = {
    "POST /cases": {"bundle": "ConstraintBundle JSON", "expected_version": "int?"},
    "GET /cases": {},
    "GET /cases/{id}": {},
    "POST /cases/{id}/check/consistency": {},
    "POST /cases/{id}/check/illegality": {},
    "POST /cases/{id}/illegal-terms": {},
    "POST /cases/{id}/optimize": {"strategy": "linear_search|core_guided",
                                  "weights_override": {"<constraint_id>": "positive int"}},
    "POST /sessions": {"case_id": "str"},
    "GET /sessions/{sid}": {},
    "POST /sessions/{sid}/modify": {
        "expected_version": "int (session working version)",
        "target": "variable or constraint id",
        "action": {"type": "toggle|fix_value|inject_parameter|set_weight|set_kind",
                   "value": "for fix_value/inject_parameter",
                   "name": "for inject_parameter", "sort": "for inject_parameter",
                   "weight": "for set_weight", "kind": "for set_kind"},
    },
    "POST /sessions/{sid}/run/check": {},
    "POST /sessions/{sid}/run/optimize": {"strategy": "linear_search|core_guided"},
    "POST /sessions/{sid}/commit": {},
    "DELETE /sessions/{sid}": {},
    "POST /retrieval/search": {"query": "str", "k": "int", "alpha": "0..1"},
    "POST /retrieval/expand": {"article_id": "str", "k": "int", "alpha": "0..1"},
    "POST /synthesize": {"case_text": "str", "article_ids": ["str"]},
    "GET /schema": {},
}
