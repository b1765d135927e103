"""One completion port behind every generative step.

Query generation, article filtering, constraint synthesis and trace phrasing
all go through ``CompletionPort.complete(prompt, params)``.  Tests and the
default CLI path use the deterministic mock (a pure function of prompt and
seed); production wires the HTTP port to any chat-completion endpoint
(request/response shape documented in docs/llm-port.md).

The synthesis loop is self-healing: raw output that fails JSON parsing,
bundle validation, or the solver acceptance gate (consistent law, unsat
case) is fed back verbatim into a repair prompt, up to a bounded number of
rounds.  Nothing a port produces reaches the solver without passing
validation first.
"""

from __future__ import annotations

import json
import re
import urllib.request
from dataclasses import dataclass
from importlib import resources
from typing import Any, Protocol, Sequence

from .bundle import ConstraintBundle, bundle_from_json, validate_bundle
from .legalparse import Article, ArticleMap
from .retrieval import Doc, tokenize
from .smtlib import SAT, UNSAT
from .solver import SolverConfig
from .verify import check_case_illegality, check_law_consistency

LLM_KEY_ENV = "LEXV_LLM_KEY"
MAX_REPAIR_ROUNDS = 3


class EmptyGeneration(RuntimeError):
    pass


class SynthesisExhausted(RuntimeError):
    def __init__(self, attempts):
        super().__init__(f"synthesis failed after {len(attempts)} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class CompletionParams:
    temperature: float = 0.0
    max_tokens: int = 2048
    seed: int = 0


class CompletionPort(Protocol):
    def complete(self, prompt: str, params: CompletionParams = CompletionParams()) -> str: ...


def _template(name: str) -> str:
    return resources.files("lexverify.prompts").joinpath(name).read_text()


def _payload_of(prompt: str) -> Any:
    m = re.search(r"## PAYLOAD\n(.*)\n## END PAYLOAD", prompt, re.DOTALL)
    if not m:
        return None
    try:
        return json.loads(m.group(1))
    except json.JSONDecodeError:
        return m.group(1)


def _first_sentence(text: str) -> str:
    for sep in (". ", "。", "; "):
        if sep in text:
            return text.split(sep, 1)[0].strip(" .。;")
    return text.strip(" .。;")


class MockCompletionPort:
    """Deterministic stand-in: dispatches on the task marker in the prompt
    and computes the reply from the payload alone."""

    def complete(self, prompt: str, params: CompletionParams = CompletionParams()) -> str:
        task = ""
        m = re.search(r"## LEXVERIFY TASK: ([a-z-]+)", prompt)
        if m:
            task = m.group(1)
        payload = _payload_of(prompt)
        if task == "generate-queries":
            return self._generate_queries(payload)
        if task == "filter-useful":
            return self._filter_useful(payload)
        if task == "synthesize-bundle":
            return self._synthesize(payload)
        if task == "phrase-trace":
            return payload if isinstance(payload, str) else "\n".join(payload or ())
        return ""

    def _generate_queries(self, payload) -> str:
        if not isinstance(payload, dict):
            return ""
        queries = []
        title = (payload.get("title") or "").strip()
        if title:
            queries.append(title)
        for clause in payload.get("clauses", ()):
            s = _first_sentence(re.sub(r"^\S+[.、]\s*", "", clause))
            if s:
                queries.append(s)
        return "\n".join(queries)

    def _filter_useful(self, payload) -> str:
        if not isinstance(payload, dict):
            return "[]"
        base_words = {t for t in tokenize(payload.get("base", "")) if len(t) > 2}
        keep = []
        for doc in payload.get("docs", ()):
            words = {t for t in tokenize(doc.get("text", "")) if len(t) > 2}
            if words & base_words:
                keep.append(doc.get("doc_id"))
        return json.dumps(keep)

    def _synthesize(self, payload) -> str:
        """Minimal generic violating bundle: one flagged breach fact against
        a rule that penalizes it.  Passes the acceptance gate by design."""
        case_text = payload.get("case_text", "") if isinstance(payload, dict) else ""
        case_id = "synthesized-" + (re.sub(r"\W+", "-", case_text.lower()).strip("-")[:32] or "case")
        bundle = {
            "case_id": case_id,
            "vars": [
                {"name": "violation_found", "sort": "bool", "group": "facts:breach"},
                {"name": "remediated", "sort": "bool", "group": "facts:actions"},
                {"name": "penalty", "sort": "bool", "group": "meta:penalty_conditions"},
            ],
            "constraints": [
                {"id": "law_penalty", "kind": "hard", "group": "meta:penalty_conditions",
                 "expr": ["iff", "penalty", ["and", "violation_found", ["not", "remediated"]]]},
                {"id": "fact_violation_found", "kind": "soft", "group": "facts:breach",
                 "weight": 2, "expr": ["=", "violation_found", True]},
                {"id": "fact_remediated", "kind": "soft", "group": "facts:actions",
                 "weight": 1, "expr": ["=", "remediated", False]},
            ],
            "penalty_var": "penalty",
            "facts": {"violation_found": True, "remediated": False},
            "meta": {"origin": "mock-synthesis"},
        }
        return json.dumps(bundle, indent=1)


@dataclass
class ScriptedPort:
    """Replays canned responses in order; for repair-loop tests."""

    responses: list[str]
    calls: int = 0

    def complete(self, prompt: str, params: CompletionParams = CompletionParams()) -> str:
        if self.calls >= len(self.responses):
            raise EmptyGeneration("scripted port ran out of responses")
        out = self.responses[self.calls]
        self.calls += 1
        return out


@dataclass
class HttpCompletionPort:
    """Minimal chat-completion client; see docs/llm-port.md for the wire shape."""

    endpoint: str
    model: str
    api_key: str = ""
    timeout_s: float = 60.0

    def complete(self, prompt: str, params: CompletionParams = CompletionParams()) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "seed": params.seed,
        }
        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json",
                     **({"Authorization": f"Bearer {self.api_key}"} if self.api_key else {})},
            method="POST",
        )
        with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
            reply = json.loads(resp.read().decode("utf-8"))
        return reply["choices"][0]["message"]["content"]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _article_view(base) -> dict:
    """Title/clauses view of an Article or a retrieval Doc."""
    if isinstance(base, Article):
        return {"title": base.title, "clauses": list(base.clauses), "content": base.content}
    if isinstance(base, Doc):
        lines = [ln.strip() for ln in base.text.splitlines() if ln.strip()]
        title = lines[0] if lines else ""
        clauses = [ln for ln in lines[1:] if re.match(r"^(\d+[.、]|[一二三四五六七八九十]+、)", ln)]
        return {"title": title, "clauses": clauses, "content": base.text}
    raise TypeError(f"cannot view {type(base).__name__} as an article")


def gen_queries(base, port: CompletionPort, seed: int = 0) -> list[str]:
    """Diverse query set for a base article; deduplicated, never empty."""
    view = _article_view(base)
    prompt = _template("generate_queries.txt").replace(
        "{payload}", json.dumps(view, ensure_ascii=False))
    for attempt_seed in (seed, seed + 1):
        raw = port.complete(prompt, CompletionParams(seed=attempt_seed))
        queries = []
        for line in raw.splitlines():
            q = line.strip()
            if q and q not in queries:
                queries.append(q)
        if queries:
            return queries
    raise EmptyGeneration("query generation produced no queries after retry")


def filter_useful(docs: Sequence[Doc], base, port: CompletionPort,
                  seed: int = 0) -> list[Doc]:
    """Subset of docs the port deems useful context; the subset contract is
    enforced here, so hallucinated ids are dropped silently."""
    view = _article_view(base)
    payload = {
        "base": f"{view['title']}\n{view['content']}",
        "docs": [{"doc_id": d.doc_id, "text": d.text} for d in docs],
    }
    prompt = _template("filter_useful.txt").replace(
        "{payload}", json.dumps(payload, ensure_ascii=False))
    raw = port.complete(prompt, CompletionParams(seed=seed))
    try:
        ids = json.loads(raw)
    except json.JSONDecodeError:
        ids = []
    if not isinstance(ids, list):
        ids = []
    wanted = {i for i in ids if isinstance(i, str)}
    return [d for d in docs if d.doc_id in wanted]


@dataclass(frozen=True)
class SynthesisAttempt:
    index: int  # numbered from 1
    prompt: str
    raw_output: str
    error: str = ""
    solver_feedback: str = ""

    def succeeded(self) -> bool:
        return not self.error


def _extract_json(raw: str) -> Any:
    start = raw.find("{")
    end = raw.rfind("}")
    if start < 0 or end <= start:
        raise json.JSONDecodeError("no JSON object found", raw, 0)
    return json.loads(raw[start:end + 1])


def synthesize_bundle(case_text: str, articles: ArticleMap | dict,
                      port: CompletionPort,
                      max_repair_rounds: int = MAX_REPAIR_ROUNDS,
                      cfg: SolverConfig | None = None,
                      ) -> tuple[ConstraintBundle, list[SynthesisAttempt]]:
    """Case text + statutory context -> validated bundle, via the port.

    Acceptance gate per attempt: the bundle parses, validates, its law base
    is satisfiable, and the case illegality check is unsatisfiable.  Each
    failure is embedded verbatim in the next repair prompt.
    """
    from .legalparse import articles_to_json

    articles_json = articles_to_json(articles) if isinstance(articles, ArticleMap) else articles
    payload = json.dumps({"case_text": case_text, "articles": articles_json},
                         ensure_ascii=False)
    template = _template("synthesize_bundle.txt")
    attempts: list[SynthesisAttempt] = []
    feedback = ""
    for i in range(1, max_repair_rounds + 1):
        prompt = template.replace("{payload}", payload).replace("{feedback}", feedback)
        raw = port.complete(prompt, CompletionParams(seed=i - 1))
        error = solver_feedback = ""
        bundle = None
        try:
            bundle = bundle_from_json(_extract_json(raw))
        except Exception as exc:
            error = f"parse error: {exc}"
        if bundle is not None:
            issues = validate_bundle(bundle)
            if issues:
                error = "validation errors: " + "; ".join(str(e) for e in issues)
        if bundle is not None and not error:
            law = check_law_consistency(bundle, cfg)
            if law.status != SAT:
                error = f"law consistency check returned {law.status}, expected sat"
                solver_feedback = f"law core: {list(law.core_ids)}" if law.core_ids else ""
            else:
                case = check_case_illegality(bundle, cfg)
                if case.status != UNSAT:
                    error = (f"case illegality check returned {case.status}, expected unsat: "
                             "the encoding fails to capture the violation")
        attempts.append(SynthesisAttempt(index=i, prompt=prompt, raw_output=raw,
                                         error=error, solver_feedback=solver_feedback))
        if not error:
            return bundle, attempts
        feedback = ("A previous attempt failed. Fix exactly this problem and return "
                    f"the corrected JSON only:\n{error}\n")
    raise SynthesisExhausted(attempts)


def phrase_trace(lines: Sequence[str], port: CompletionPort, seed: int = 0) -> tuple[str, ...]:
    """Optional plain-language rewrite of correction-trace lines; falls back
    to the input when the port returns a different line count."""
    prompt = _template("phrase_trace.txt").replace("{payload}", json.dumps(list(lines)))
    raw = port.complete(prompt, CompletionParams(seed=seed))
    out = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if len(out) != len(lines):
        return tuple(lines)
    return tuple(out)
