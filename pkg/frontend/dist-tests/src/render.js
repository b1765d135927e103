/** Pure HTML renderers over the view state; the bootstrap only splices the
 * returned strings into the document. */
import { renderInfix } from "./infix.js";
import { factConstraints, lawConstraints } from "./state.js";
function esc(text) {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
export function constraintCard(c, highlighted, factValue) {
    const classes = ["card", c.kind, highlighted ? "core" : ""].filter(Boolean).join(" ");
    const weight = c.kind === "soft" ? `<span class="weight">w=${c.weight ?? 1}</span>` : "";
    const value = factValue === undefined ? ""
        : `<span class="fact-value">${esc(String(factValue))}</span>`;
    return `<div class="${classes}" data-constraint="${esc(c.id)}" data-group="${esc(c.group)}">
  <div class="card-head"><code>${esc(c.id)}</code>${weight}${value}</div>
  <div class="card-group">${esc(c.group)}</div>
  <div class="card-expr">${esc(renderInfix(c.expr))}</div>
</div>`;
}
export function bundleCards(state) {
    const bundle = state.bundle;
    if (!bundle)
        return "<p>no case loaded</p>";
    const mark = (c) => constraintCard(c, state.highlightedConstraintIds.has(c.id), factValueFor(bundle, c));
    const law = lawConstraints(bundle).map(mark).join("\n");
    const facts = factConstraints(bundle).map(mark).join("\n");
    return `<section class="law"><h3>statutory constraints</h3>${law}</section>
<section class="facts"><h3>case facts</h3>${facts}</section>`;
}
function factValueFor(bundle, c) {
    if (c.kind !== "soft" || !Array.isArray(c.expr))
        return undefined;
    const [head, lhs] = c.expr;
    if (head === "=" && typeof lhs === "string") {
        return bundle.facts[lhs];
    }
    return undefined;
}
export function badge(panel) {
    if (panel.badge === "none")
        return "";
    const label = panel.badge === "compliant" ? "compliant"
        : panel.badge === "violating" ? "violation" : "unknown";
    return `<span class="badge ${panel.badge}">${label}</span>`;
}
export function resultPanel(panel) {
    if (panel.kind === "none")
        return "<p>run a check to see results</p>";
    const core = panel.coreGroups.length
        ? `<ul class="core-groups">${panel.coreGroups.map((g) => `<li>${esc(g)}</li>`).join("")}</ul>`
        : "";
    const delta = panel.delta.length
        ? `<ul class="delta">${panel.delta.map((d) => `<li><code>${esc(d.constraint_id)}</code> ${d.diffs.map((x) => `${esc(x.var)}: ${esc(String(x.old))} → ${esc(String(x.new))}`).join("; ")}</li>`).join("")}</ul>`
        : "";
    const trace = panel.trace.length
        ? `<ol class="trace">${panel.trace.map((t) => `<li>${esc(t)}</li>`).join("")}</ol>`
        : "";
    return `<div class="result">${badge(panel)}<p>${esc(panel.statusLabel)}</p>${core}${delta}${trace}</div>`;
}
export function timeline(state) {
    if (!state.timeline.length)
        return "<p>no modifications staged</p>";
    return `<ol class="timeline">${state.timeline.map((e) => `<li>#${e.step} ${esc(e.target)} — ${esc(e.action)} (v${e.workingVersion})</li>`).join("")}</ol>`;
}
export function searchRows(hits) {
    return hits.map((h) => `<tr data-doc="${esc(h.doc_id)}"><td>${esc(h.doc_id)}</td>` +
        `<td>${h.bm25.toFixed(4)}</td><td>${h.sim_vec.toFixed(4)}</td>` +
        `<td>${h.hybrid.toFixed(4)}</td><td>${esc(h.text)}</td></tr>`).join("\n");
}
