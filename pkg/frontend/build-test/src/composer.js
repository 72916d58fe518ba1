/**
 * Meta-skill composer: a draft the user edits, client-side validation
 * mirroring the gateway's config invariants, and the submit flow.
 *
 * Submit stays disabled until the draft has no violations; server-side 4xx
 * violations come back as per-field messages, and a network failure keeps
 * the draft untouched behind a non-blocking banner.
 */
import { ApiError } from "./api.js";
export function emptyDraft() {
    return {
        metaId: "",
        strategy: "late_fusion",
        memberSkillIds: [],
        routerModelId: "",
        scoreThreshold: "0.05",
        fusedTensorPath: "",
        aggregator: "max_confidence",
        timeoutMs: "10000",
        maxConcurrency: "8",
    };
}
function positiveInt(raw) {
    if (!/^\d+$/.test(raw.trim()))
        return null;
    const value = Number(raw);
    return value > 0 ? value : null;
}
/** Client-side mirror of the composition invariants. Empty result = submittable. */
export function validateDraft(draft) {
    const errors = {};
    if (!draft.metaId.trim()) {
        errors.metaId = "meta-skill id is required";
    }
    if (draft.memberSkillIds.length === 0) {
        errors.memberSkillIds = "select at least one member skill";
    }
    if (new Set(draft.memberSkillIds).size !== draft.memberSkillIds.length) {
        errors.memberSkillIds = "member skills must be distinct";
    }
    switch (draft.strategy) {
        case "selection":
            if (!draft.routerModelId.trim()) {
                errors.routerModelId = "selection needs a router model id";
            }
            if (Number.isNaN(Number(draft.scoreThreshold))) {
                errors.scoreThreshold = "score threshold must be a number";
            }
            break;
        case "early_fusion":
            if (!draft.fusedTensorPath.trim()) {
                errors.fusedTensorPath = "early fusion needs the fused tensor path";
            }
            break;
        case "late_fusion":
            if (positiveInt(draft.timeoutMs) === null) {
                errors.timeoutMs = "timeout must be a positive integer (ms)";
            }
            if (positiveInt(draft.maxConcurrency) === null) {
                errors.maxConcurrency = "max concurrency must be a positive integer";
            }
            if (!draft.aggregator.trim()) {
                errors.aggregator = "pick an aggregator";
            }
            break;
    }
    return errors;
}
export function canSubmit(draft) {
    return Object.keys(validateDraft(draft)).length === 0;
}
export function draftToConfig(draft) {
    const params = {};
    if (draft.strategy === "selection") {
        params.router_model_id = draft.routerModelId.trim();
        params.score_threshold = Number(draft.scoreThreshold);
    }
    else if (draft.strategy === "early_fusion") {
        params.fused_tensor_path = draft.fusedTensorPath.trim();
    }
    else {
        params.aggregator = draft.aggregator;
        params.timeout_ms = Number(draft.timeoutMs);
        params.max_concurrency = Number(draft.maxConcurrency);
    }
    return {
        meta_id: draft.metaId.trim(),
        strategy: draft.strategy,
        member_skill_ids: [...draft.memberSkillIds],
        params,
    };
}
/**
 * POST the draft. 2xx resolves to the created config (caller refreshes the
 * list); 4xx maps the gateway's response onto field errors; transport
 * failures are reported without discarding anything.
 */
export async function submitDraft(client, draft) {
    const local = validateDraft(draft);
    if (Object.keys(local).length > 0) {
        return { kind: "rejected", status: 0, errors: local };
    }
    try {
        const created = await client.createMetaSkill(draftToConfig(draft));
        return { kind: "created", created };
    }
    catch (err) {
        if (err instanceof ApiError) {
            return { kind: "rejected", status: err.status, errors: fieldErrorsFromApi(err) };
        }
        return { kind: "network_failure", message: err instanceof Error ? err.message : String(err) };
    }
}
function fieldErrorsFromApi(err) {
    const errors = {};
    switch (err.body.error) {
        case "duplicate_id":
            errors.metaId = "id taken — pick another";
            break;
        case "unknown_member":
            errors.memberSkillIds = `member is not registered: ${err.body["skill_id"] ?? "?"}`;
            break;
        case "invalid_config":
            for (const violation of err.body.violations ?? []) {
                if (violation.includes("timeout_ms"))
                    errors.timeoutMs = violation;
                else if (violation.includes("max_concurrency"))
                    errors.maxConcurrency = violation;
                else if (violation.includes("router_model_id"))
                    errors.routerModelId = violation;
                else if (violation.includes("fused_tensor_path"))
                    errors.fusedTensorPath = violation;
                else if (violation.includes("aggregator"))
                    errors.aggregator = violation;
                else if (violation.includes("member"))
                    errors.memberSkillIds = violation;
                else
                    errors.form = violation;
            }
            if (Object.keys(errors).length === 0)
                errors.form = "configuration rejected";
            break;
        default:
            errors.form = `${err.body.error} (HTTP ${err.status})`;
    }
    return errors;
}
