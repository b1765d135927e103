/** Typed client over the compliance service HTTP API.
 *
 * Every number the UI shows originates from one of these payloads; the
 * client performs no legal reasoning of its own.
 */
export class ApiError extends Error {
    constructor(status, body) {
        super(`API error ${status}: ${JSON.stringify(body)}`);
        this.status = status;
        this.body = body;
    }
}
export class ApiClient {
    constructor(baseUrl) {
        this.baseUrl = baseUrl;
    }
    async call(method, path, body) {
        const resp = await fetch(this.baseUrl + path, {
            method,
            headers: body === undefined ? {} : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const payload = await resp.json().catch(() => ({}));
        if (!resp.ok) {
            throw new ApiError(resp.status, payload);
        }
        return payload;
    }
    listCases() {
        return this.call("GET", "/cases");
    }
    getCase(caseId) {
        return this.call("GET", `/cases/${caseId}`);
    }
    putCase(bundle, expectedVersion) {
        return this.call("POST", "/cases", {
            bundle, expected_version: expectedVersion,
        });
    }
    openSession(caseId) {
        return this.call("POST", "/sessions", { case_id: caseId });
    }
    modify(sessionId, target, action, expectedVersion) {
        return this.call("POST", `/sessions/${sessionId}/modify`, { target, action, expected_version: expectedVersion });
    }
    runCheck(sessionId) {
        return this.call("POST", `/sessions/${sessionId}/run/check`);
    }
    runOptimize(sessionId) {
        return this.call("POST", `/sessions/${sessionId}/run/optimize`);
    }
    commit(sessionId) {
        return this.call("POST", `/sessions/${sessionId}/commit`);
    }
    search(query, k, alpha) {
        return this.call("POST", "/retrieval/search", { query, k, alpha });
    }
}
