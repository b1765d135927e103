/**
 * End-to-end UI round-trip against a live service (mock LLM port):
 *   1. load the worked fixture, run the illegality check, and confirm the
 *      three statutory core groups come back highlighted;
 *   2. toggle plan_executed in a session, re-run, and confirm the compliant
 *      badge;
 *   3. slide alpha from 0.8 to 0.0 on a fixed query and confirm the ranking
 *      reorders to pure lexical order.
 *
 * Everything flows through the documented HTTP API; the UI modules under
 * test are the same compiled artifacts the browser loads.
 */
import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { execFileSync, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { ApiClient } from "../src/api.js";
import { appliedModify, appliedOptimize, appliedVerdict, initialState, loadCase, openedSession, searchOrdering, } from "../src/state.js";
import { badge, bundleCards, resultPanel, timeline } from "../src/render.js";
import { renderInfix } from "../src/infix.js";
const REPO = resolve(import.meta.dirname ?? ".", "..", "..");
const PORT = 8931 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
let service;
let fixture;
const api = new ApiClient(BASE);
before(async () => {
    const work = mkdtempSync(join(tmpdir(), "lexverify-ui-"));
    const corpus = join(work, "corpus.jsonl");
    writeFileSync(corpus, [
        JSON.stringify({ doc_id: "prov-ratio", text: "capital adequacy ratio of own capital to risk capital" }),
        JSON.stringify({ doc_id: "prov-plan", text: "improvement plan submission and execution duties" }),
        JSON.stringify({ doc_id: "prov-penalty", text: "administrative penalty for unexecuted supervisory measures" }),
    ].join("\n") + "\n");
    fixture = JSON.parse(execFileSync("python3", [
        "-c",
        "from lexverify.cases import load_fsc_fixture; from lexverify.bundle import dump_bundle; print(dump_bundle(load_fsc_fixture()))",
    ], { cwd: REPO, encoding: "utf-8" }));
    service = spawn("python3", [
        "-m", "lexverify.cli", "serve",
        "--store", join(work, "store"),
        "--bind", `127.0.0.1:${PORT}`,
        "--corpus", corpus,
        "--llm", "mock",
    ], { cwd: REPO, stdio: ["ignore", "inherit", "inherit"] });
    for (let i = 0; i < 120; i++) {
        try {
            const resp = await fetch(`${BASE}/schema`);
            if (resp.ok)
                return;
        }
        catch {
            // not up yet
        }
        await new Promise((r) => setTimeout(r, 250));
    }
    throw new Error("service did not come up");
}, { timeout: 60000 });
after(() => {
    service?.kill();
});
test("load fixture, run illegality, three core groups highlighted", async () => {
    const put = await api.putCase(fixture);
    assert.equal(put.version, 1);
    let state = initialState();
    const record = await api.getCase(put.case_id);
    state = loadCase(state, record.case_id, record.version, record.bundle);
    const session = await api.openSession(put.case_id);
    state = openedSession(state, session.session_id);
    const verdict = await api.runCheck(session.session_id);
    state = appliedVerdict(state, verdict);
    assert.equal(verdict.status, "unsat");
    assert.deepEqual(new Set(state.panel.coreGroups), new Set([
        "insurance:capital_level",
        "meta:penalty_conditions",
        "insurance:level_3_measures_executed",
    ]));
    // the highlighted cards are exactly the returned core ids that have cards
    // (the penalty pin is an assertion added by the check, not a constraint)
    const html = bundleCards(state);
    const highlighted = [...html.matchAll(/class="card [^"]*core" data-constraint="([^"]+)"/g)]
        .map((m) => m[1]);
    const cardIds = new Set(record.bundle.constraints.map((c) => c.id));
    const expected = verdict.core.ids.filter((id) => cardIds.has(id));
    assert.deepEqual(new Set(highlighted), new Set(expected));
    assert.ok(verdict.core.ids.includes("penalty_pin"));
    assert.ok(resultPanel(state.panel).includes("insurance:capital_level"));
});
test("toggle plan_executed, optimize, compliant badge", async () => {
    const caseId = fixture.case_id;
    const session = await api.openSession(caseId);
    let state = initialState();
    const record = await api.getCase(caseId);
    state = loadCase(state, record.case_id, record.version, record.bundle);
    state = openedSession(state, session.session_id);
    const modified = await api.modify(session.session_id, "plan_executed", { type: "toggle" }, 0);
    state = appliedModify(state, "plan_executed", "toggle", modified.working_version, modified.bundle);
    assert.equal(modified.bundle.facts["plan_executed"], true);
    assert.ok(timeline(state).includes("plan_executed"));
    const check = await api.runCheck(session.session_id);
    state = appliedVerdict(state, check);
    assert.equal(check.status, "sat");
    assert.ok(badge(state.panel).includes("compliant"));
    const optimized = await api.runOptimize(session.session_id);
    state = appliedOptimize(state, optimized);
    assert.equal(optimized.cost, 0);
    assert.deepEqual(optimized.delta, []);
    assert.ok(badge(state.panel).includes("compliant"));
    assert.ok(resultPanel(state.panel).includes("no revision required"));
});
test("alpha slider reorders ranking to pure lexical order at zero", async () => {
    const query = "capital adequacy ratio";
    const hybrid = await api.search(query, 3, 0.8);
    const lexical = await api.search(query, 3, 0.0);
    // at alpha = 0 the displayed order must equal the BM25 order
    const bm25Sorted = [...lexical.hits]
        .sort((a, b) => (b.bm25 - a.bm25) || a.doc_id.localeCompare(b.doc_id))
        .map((h) => h.doc_id);
    assert.deepEqual(searchOrdering(lexical.hits), bm25Sorted);
    assert.equal(searchOrdering(lexical.hits)[0], "prov-ratio");
    // both payloads expose the full score breakdown for the table
    for (const h of [...hybrid.hits, ...lexical.hits]) {
        assert.ok(typeof h.bm25 === "number");
        assert.ok(typeof h.sim_vec === "number");
        assert.ok(typeof h.hybrid === "number");
    }
    // and the slider genuinely changes the fused scores
    assert.notDeepEqual(hybrid.hits.map((h) => h.hybrid), lexical.hits.map((h) => h.hybrid));
});
test("version conflict surfaces for concurrent sessions", async () => {
    const caseId = fixture.case_id;
    const s1 = await api.openSession(caseId);
    const s2 = await api.openSession(caseId);
    await api.modify(s1.session_id, "plan_executed", { type: "toggle" }, 0);
    await api.commit(s1.session_id);
    await api.modify(s2.session_id, "plan_submitted", { type: "toggle" }, 0);
    await assert.rejects(api.commit(s2.session_id), (err) => err.status === 409);
});
test("infix rendering shows analyst-readable formulas", () => {
    assert.equal(renderInfix([">=", "r", "200.0"]), "r ≥ 200.0");
    const level = fixture.constraints.find((c) => c.id === "c_capital_level");
    const text = renderInfix(level.expr);
    assert.ok(text.includes("capital_level ="));
    assert.ok(text.includes("if"));
    assert.ok(!text.includes("(assert"));
});
