import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from lexverify.bundle import bundle_to_json, dump_bundle
from lexverify.gateway import (
    CompletionParams,
    EmptyGeneration,
    HttpCompletionPort,
    MockCompletionPort,
    ScriptedPort,
    SynthesisExhausted,
    filter_useful,
    gen_queries,
    phrase_trace,
    synthesize_bundle,
)
from lexverify.legalparse import Article, ArticleMap
from lexverify.retrieval import Doc

ARTICLE = Article(
    title="Capital adequacy",
    clauses=("1. Maintain the prescribed ratio of own capital to risk capital.",
             "2. Submit an improvement plan when classified inadequate."),
    content="An insurer shall maintain an adequate capital level.",
)


def test_mock_is_deterministic():
    port = MockCompletionPort()
    prompt = "## LEXVERIFY TASK: generate-queries (v1)\n## PAYLOAD\n" + \
        json.dumps({"title": "T", "clauses": ["1. A. B", "2. C"]}) + "\n## END PAYLOAD"
    outs = {port.complete(prompt, CompletionParams(seed=3)) for _ in range(4)}
    assert len(outs) == 1


def test_gen_queries_title_plus_first_sentences():
    queries = gen_queries(ARTICLE, MockCompletionPort())
    assert len(queries) == 3
    assert queries[0] == "Capital adequacy"
    assert queries[1].startswith("Maintain the prescribed ratio")
    assert queries[2].startswith("Submit an improvement plan")


def test_gen_queries_deduplicates():
    class Dup:
        def complete(self, prompt, params=CompletionParams()):
            return "same query\nsame query\nother query\n"

    assert gen_queries(ARTICLE, Dup()) == ["same query", "other query"]


def test_gen_queries_empty_article_raises_after_retry():
    empty = Article(title="", clauses=(), content="")
    calls = []

    class Recording(MockCompletionPort):
        def complete(self, prompt, params=CompletionParams()):
            calls.append(params.seed)
            return super().complete(prompt, params)

    with pytest.raises(EmptyGeneration):
        gen_queries(empty, Recording())
    assert len(calls) == 2  # one retry with a shifted seed


def test_filter_useful_mock_keeps_overlapping():
    docs = [Doc("d1", "capital adequacy requirements for insurers"),
            Doc("d2", "zebra migration patterns")]
    kept = filter_useful(docs, ARTICLE, MockCompletionPort())
    assert [d.doc_id for d in kept] == ["d1"]


def test_filter_useful_drops_hallucinated_ids():
    class Hallucinating:
        def complete(self, prompt, params=CompletionParams()):
            return json.dumps(["d1", "ghost-id"])

    docs = [Doc("d1", "anything"), Doc("d2", "else")]
    kept = filter_useful(docs, ARTICLE, Hallucinating())
    assert [d.doc_id for d in kept] == ["d1"]


def test_filter_useful_garbage_reply_keeps_nothing():
    class Garbage:
        def complete(self, prompt, params=CompletionParams()):
            return "not json at all"

    docs = [Doc("d1", "a")]
    assert filter_useful(docs, ARTICLE, Garbage()) == []


# -- synthesis loop ------------------------------------------------------------

def _articles():
    return ArticleMap(articles={"143-4": ARTICLE})


def test_synthesis_success_in_one_attempt(fsc):
    port = ScriptedPort([dump_bundle(fsc)])
    bundle, attempts = synthesize_bundle("case text", _articles(), port)
    assert bundle == fsc
    assert len(attempts) == 1 and attempts[0].succeeded()


def test_synthesis_repair_in_two_attempts(fsc):
    port = ScriptedPort(["{ this is not json", dump_bundle(fsc)])
    bundle, attempts = synthesize_bundle("case text", _articles(), port)
    assert bundle == fsc
    assert len(attempts) == 2
    assert "parse error" in attempts[0].error
    # the exact failure is fed back into the repair prompt
    assert attempts[0].error.split("parse error: ")[1][:20] in attempts[1].prompt


def test_synthesis_exhausted_after_three(fsc):
    port = ScriptedPort(["bad one", "bad two", "bad three"])
    with pytest.raises(SynthesisExhausted) as err:
        synthesize_bundle("case text", _articles(), port)
    assert len(err.value.attempts) == 3
    assert all(not a.succeeded() for a in err.value.attempts)


def test_synthesis_gate_rejects_satisfiable_case(fsc):
    # a bundle whose facts are consistent with a lawful outcome fails the
    # acceptance gate (illegality must be unsat) and triggers repair
    from lexverify.service import _apply_modify

    compliant = _apply_modify(fsc, "plan_executed", {"type": "toggle"})
    port = ScriptedPort([dump_bundle(compliant), dump_bundle(fsc)])
    bundle, attempts = synthesize_bundle("case text", _articles(), port)
    assert bundle == fsc
    assert len(attempts) == 2
    assert "expected unsat" in attempts[0].error


def test_synthesis_gate_rejects_invalid_bundle(fsc):
    broken = json.loads(dump_bundle(fsc))
    broken["constraints"][0]["expr"] = ["<", "own_capital", "not_a_var_or_number!"]
    port = ScriptedPort([json.dumps(broken), dump_bundle(fsc)])
    bundle, attempts = synthesize_bundle("case text", _articles(), port)
    assert len(attempts) == 2
    assert attempts[0].error


def test_mock_synthesis_passes_gate():
    bundle, attempts = synthesize_bundle("insurer failed to execute its plan",
                                         _articles(), MockCompletionPort())
    assert len(attempts) == 1
    assert bundle.penalty_var == "penalty"


def test_phrase_trace_falls_back_on_count_mismatch():
    class Chatty:
        def complete(self, prompt, params=CompletionParams()):
            return "only one line"

    lines = ("a -> b", "c -> d")
    assert phrase_trace(lines, Chatty()) == lines
    assert phrase_trace(lines, MockCompletionPort()) == lines


# -- live port wire shape ---------------------------------------------------------

class _StubHandler(BaseHTTPRequestHandler):
    received = {}

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        _StubHandler.received = {
            "body": json.loads(self.rfile.read(length)),
            "auth": self.headers.get("Authorization"),
        }
        reply = {"choices": [{"message": {"content": "stub reply"}}]}
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def test_http_port_request_and_response_shape():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        port = HttpCompletionPort(
            endpoint=f"http://127.0.0.1:{server.server_port}/v1/chat/completions",
            model="test-model", api_key="secret")
        out = port.complete("hello prompt", CompletionParams(temperature=0.5, seed=9))
        assert out == "stub reply"
        body = _StubHandler.received["body"]
        assert body["model"] == "test-model"
        assert body["messages"] == [{"role": "user", "content": "hello prompt"}]
        assert body["temperature"] == 0.5
        assert body["seed"] == 9
        assert _StubHandler.received["auth"] == "Bearer secret"
    finally:
        server.shutdown()
