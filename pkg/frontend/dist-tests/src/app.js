/** Browser bootstrap: wires the documented HTTP API to the DOM.
 *
 * All reasoning happens server-side; this file only moves payloads between
 * the API client, the state reducers, and the renderers.
 */
import { ApiClient } from "./api.js";
import { appliedModify, appliedOptimize, appliedVerdict, initialState, loadCase, openedSession, } from "./state.js";
import { bundleCards, resultPanel, searchRows, timeline } from "./render.js";
const api = new ApiClient("");
let state = initialState();
function $(id) {
    const el = document.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
}
function paint() {
    $("cards").innerHTML = bundleCards(state);
    $("result").innerHTML = resultPanel(state.panel);
    $("timeline").innerHTML = timeline(state);
    $("case-label").textContent = state.caseId
        ? `${state.caseId} @ v${state.version}` : "no case";
    document.querySelectorAll("#cards .card.soft").forEach((card) => {
        card.onclick = () => {
            const target = card.dataset.constraint;
            if (!target)
                return;
            void stageToggleByConstraint(target);
        };
    });
}
async function refreshCaseList() {
    const { cases } = await api.listCases();
    const select = $("case-select");
    select.innerHTML = cases.map((c) => `<option value="${c.case_id}">${c.case_id} (v${c.version})</option>`).join("");
}
async function openCase(caseId) {
    const record = await api.getCase(caseId);
    state = loadCase(state, record.case_id, record.version, record.bundle);
    const session = await api.openSession(caseId);
    state = openedSession(state, session.session_id);
    paint();
}
async function stageToggleByConstraint(constraintId) {
    // fact cards toggle their pinned variable; other constraints flip kind
    const bundle = state.bundle;
    if (!bundle || !state.sessionId)
        return;
    const constraint = bundle.constraints.find((c) => c.id === constraintId);
    let target = constraintId;
    if (constraint && Array.isArray(constraint.expr) && constraint.expr[0] === "="
        && typeof constraint.expr[1] === "string") {
        const varName = constraint.expr[1];
        const decl = bundle.vars.find((v) => v.name === varName);
        if (decl?.sort === "bool")
            target = varName;
    }
    await stageModify(target, { type: "toggle" });
}
async function stageModify(target, action) {
    if (!state.sessionId)
        return;
    try {
        const out = await api.modify(state.sessionId, target, action, state.workingVersion);
        state = appliedModify(state, target, action.type, out.working_version, out.bundle);
        paint();
    }
    catch (err) {
        reportError(err);
    }
}
async function runCheck() {
    if (!state.sessionId)
        return;
    try {
        state = appliedVerdict(state, await api.runCheck(state.sessionId));
        paint();
    }
    catch (err) {
        reportError(err);
    }
}
async function runOptimize() {
    if (!state.sessionId)
        return;
    try {
        state = appliedOptimize(state, await api.runOptimize(state.sessionId));
        paint();
    }
    catch (err) {
        reportError(err);
    }
}
async function commit() {
    if (!state.sessionId)
        return;
    try {
        const out = await api.commit(state.sessionId);
        state = { ...state, version: out.version, timeline: [] };
        paint();
    }
    catch (err) {
        reportError(err);
    }
}
async function runSearch() {
    const query = $("search-query").value;
    const alpha = Number($("alpha").value);
    $("alpha-label").textContent = alpha.toFixed(2);
    if (!query)
        return;
    try {
        const { hits } = await api.search(query, 10, alpha);
        $("search-results").innerHTML = searchRows(hits);
    }
    catch (err) {
        reportError(err);
    }
}
function reportError(err) {
    $("errors").textContent = err instanceof Error ? err.message : String(err);
}
function main() {
    $("btn-check").onclick = () => void runCheck();
    $("btn-optimize").onclick = () => void runOptimize();
    $("btn-commit").onclick = () => void commit();
    $("btn-search").onclick = () => void runSearch();
    $("alpha").oninput = () => void runSearch();
    $("case-select").onchange = (ev) => void openCase(ev.target.value);
    $("btn-reload").onclick = () => void refreshCaseList();
    void refreshCaseList();
}
main();
