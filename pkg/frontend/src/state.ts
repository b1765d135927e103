/** View state derived purely from service responses.
 *
 * The UI never computes a verdict of its own: highlighted cards, the badge,
 * and the delta panel are all projections of the last API payloads, and the
 * timeline records every modification the server acknowledged.
 */

import type {
  BundleJson,
  ConstraintJson,
  DeltaEntryJson,
  OptimizeJson,
  SearchHitJson,
  VerdictJson,
} from "./api.js";

export interface TimelineEntry {
  step: number;
  target: string;
  action: string;
  workingVersion: number;
}

export interface ResultPanel {
  kind: "none" | "verdict" | "optimize";
  statusLabel: string;
  badge: "violating" | "compliant" | "unknown" | "none";
  coreGroups: string[];
  delta: DeltaEntryJson[];
  trace: string[];
}

export interface CaseViewState {
  caseId: string;
  version: number;
  sessionId: string | null;
  workingVersion: number;
  bundle: BundleJson | null;
  highlightedConstraintIds: Set<string>;
  panel: ResultPanel;
  timeline: TimelineEntry[];
}

export function emptyPanel(): ResultPanel {
  return { kind: "none", statusLabel: "", badge: "none", coreGroups: [],
           delta: [], trace: [] };
}

export function initialState(): CaseViewState {
  return {
    caseId: "",
    version: 0,
    sessionId: null,
    workingVersion: 0,
    bundle: null,
    highlightedConstraintIds: new Set(),
    panel: emptyPanel(),
    timeline: [],
  };
}

export function loadCase(state: CaseViewState, caseId: string, version: number,
                         bundle: BundleJson): CaseViewState {
  return { ...initialState(), caseId, version, bundle };
}

export function openedSession(state: CaseViewState, sessionId: string): CaseViewState {
  return { ...state, sessionId, workingVersion: 0, timeline: [] };
}

export function appliedModify(state: CaseViewState, target: string, action: string,
                              workingVersion: number, bundle: BundleJson): CaseViewState {
  const entry: TimelineEntry = {
    step: state.timeline.length + 1, target, action, workingVersion,
  };
  return { ...state, bundle, workingVersion, timeline: [...state.timeline, entry] };
}

/** Core-highlighted cards correspond exactly to the returned core ids. */
export function appliedVerdict(state: CaseViewState, verdict: VerdictJson): CaseViewState {
  const coreIds = verdict.core?.ids ?? [];
  const groups = verdict.core?.groups ?? [];
  const badge = verdict.status === "unsat" ? "violating"
    : verdict.status === "sat" ? "compliant" : "unknown";
  return {
    ...state,
    highlightedConstraintIds: new Set(coreIds),
    panel: {
      kind: "verdict",
      statusLabel: verdict.status,
      badge,
      coreGroups: groups,
      delta: [],
      trace: [],
    },
  };
}

export function appliedOptimize(state: CaseViewState, result: OptimizeJson): CaseViewState {
  if (!result.feasible) {
    return {
      ...state,
      highlightedConstraintIds: new Set(),
      panel: { kind: "optimize", statusLabel: "no feasible compliance",
               badge: "violating", coreGroups: [], delta: [],
               trace: result.reason ? [result.reason] : [] },
    };
  }
  const delta = result.delta ?? [];
  return {
    ...state,
    highlightedConstraintIds: new Set(delta.map((d) => d.constraint_id)),
    panel: {
      kind: "optimize",
      statusLabel: `minimal correction cost ${result.cost}`,
      badge: delta.length === 0 ? "compliant" : "violating",
      coreGroups: [],
      delta,
      trace: result.trace ?? [],
    },
  };
}

export function lawConstraints(bundle: BundleJson): ConstraintJson[] {
  return bundle.constraints.filter((c) => c.kind === "hard");
}

export function factConstraints(bundle: BundleJson): ConstraintJson[] {
  return bundle.constraints.filter((c) => c.kind === "soft");
}

/** Search hits in display order; the service already ranks by hybrid score. */
export function searchOrdering(hits: SearchHitJson[]): string[] {
  return hits.map((h) => h.doc_id);
}
