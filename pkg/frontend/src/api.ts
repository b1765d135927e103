/** Typed client over the compliance service HTTP API.
 *
 * Every number the UI shows originates from one of these payloads; the
 * client performs no legal reasoning of its own.
 */

export type ExprNode = boolean | number | string | ExprNode[];

export interface VarDecl {
  name: string;
  sort: "bool" | "int" | "real";
  group?: string;
}

export interface ConstraintJson {
  id: string;
  kind: "hard" | "soft";
  group: string;
  weight?: number;
  description?: string;
  expr: ExprNode;
}

export interface BundleJson {
  case_id: string;
  vars: VarDecl[];
  constraints: ConstraintJson[];
  penalty_var: string;
  facts: Record<string, boolean | number | string>;
  meta: Record<string, string>;
}

export interface CaseRecordJson {
  case_id: string;
  version: number;
  bundle: BundleJson;
  results: Record<string, unknown>;
}

export interface VerdictJson {
  status: "sat" | "unsat" | "unknown";
  elapsed_ms: number;
  model?: Record<string, boolean | number | string>;
  core?: { ids: string[]; groups: string[] };
}

export interface DeltaEntryJson {
  constraint_id: string;
  group: string;
  weight: number;
  diffs: { var: string; old: unknown; new: unknown }[];
}

export interface OptimizeJson {
  feasible: boolean;
  reason?: string;
  cost?: number;
  delta?: DeltaEntryJson[];
  trace?: string[];
  strategy?: string;
  checks_performed?: number;
}

export interface SessionJson {
  session_id: string;
  case_id: string;
  base_version: number;
}

export interface SearchHitJson {
  doc_id: string;
  bm25: number;
  sim_vec: number;
  hybrid: number;
  text: string;
  law: string;
  article: string;
}

export type ModifyAction =
  | { type: "toggle" }
  | { type: "fix_value"; value: boolean | number | string }
  | { type: "inject_parameter"; name: string; sort: string; value: unknown }
  | { type: "set_weight"; weight: number }
  | { type: "set_kind"; kind: "hard" | "soft" };

export class ApiError extends Error {
  constructor(public status: number, public body: unknown) {
    super(`API error ${status}: ${JSON.stringify(body)}`);
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, payload);
    }
    return payload as T;
  }

  listCases() {
    return this.call<{ cases: { case_id: string; version: number; title: string }[] }>(
      "GET", "/cases");
  }

  getCase(caseId: string) {
    return this.call<CaseRecordJson>("GET", `/cases/${caseId}`);
  }

  putCase(bundle: BundleJson, expectedVersion?: number) {
    return this.call<{ case_id: string; version: number }>("POST", "/cases", {
      bundle, expected_version: expectedVersion,
    });
  }

  openSession(caseId: string) {
    return this.call<SessionJson>("POST", "/sessions", { case_id: caseId });
  }

  modify(sessionId: string, target: string, action: ModifyAction, expectedVersion: number) {
    return this.call<{ working_version: number; bundle: BundleJson }>(
      "POST", `/sessions/${sessionId}/modify`,
      { target, action, expected_version: expectedVersion });
  }

  runCheck(sessionId: string) {
    return this.call<VerdictJson & { working_version: number }>(
      "POST", `/sessions/${sessionId}/run/check`);
  }

  runOptimize(sessionId: string) {
    return this.call<OptimizeJson & { working_version: number }>(
      "POST", `/sessions/${sessionId}/run/optimize`);
  }

  commit(sessionId: string) {
    return this.call<{ case_id: string; version: number }>(
      "POST", `/sessions/${sessionId}/commit`);
  }

  search(query: string, k: number, alpha: number) {
    return this.call<{ hits: SearchHitJson[] }>(
      "POST", "/retrieval/search", { query, k, alpha });
  }
}
