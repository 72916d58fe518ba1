/**
 * Thin typed client over the gateway's JSON API. The UI is stateless with
 * respect to the gateway: every list renders from these GETs alone.
 */
/** A non-2xx response, carrying the gateway's structured error body. */
export class ApiError extends Error {
    constructor(status, body) {
        super(`HTTP ${status}: ${body.error ?? "unknown error"}`);
        this.status = status;
        this.body = body;
    }
}
async function parseOrThrow(res) {
    let body = {};
    try {
        body = await res.json();
    }
    catch {
        body = { error: `HTTP ${res.status} with unreadable body` };
    }
    if (!res.ok) {
        throw new ApiError(res.status, body);
    }
    return body;
}
export function createClient(baseUrl = "") {
    const base = baseUrl.replace(/\/$/, "");
    const json = { "Content-Type": "application/json" };
    return {
        async listSkills() {
            const body = await parseOrThrow(await fetch(`${base}/skills`));
            return body.skills;
        },
        async listMetaSkills() {
            const body = await parseOrThrow(await fetch(`${base}/meta-skills`));
            return body.meta_skills;
        },
        async createMetaSkill(config) {
            const body = await parseOrThrow(await fetch(`${base}/meta-skills`, {
                method: "POST",
                headers: json,
                body: JSON.stringify(config),
            }));
            return body.meta_skill;
        },
        async deleteSkill(skillId) {
            await parseOrThrow(await fetch(`${base}/skills/${encodeURIComponent(skillId)}`, {
                method: "DELETE",
            }));
        },
        async deleteMetaSkill(metaId) {
            await parseOrThrow(await fetch(`${base}/meta-skills/${encodeURIComponent(metaId)}`, {
                method: "DELETE",
            }));
        },
        async query(targetId, request) {
            return parseOrThrow(await fetch(`${base}/query/${encodeURIComponent(targetId)}`, {
                method: "POST",
                headers: json,
                body: JSON.stringify(request),
            }));
        },
        async health() {
            return parseOrThrow(await fetch(`${base}/health`));
        },
        async fetchBenchReport(url) {
            return parseOrThrow(await fetch(url));
        },
    };
}
