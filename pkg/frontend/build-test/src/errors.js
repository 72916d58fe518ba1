/**
 * One distinct, user-visible rendering per gateway error code — nothing
 * fails silently.
 */
import { esc } from "./render.js";
const ERROR_STYLES = {
    unknown_target: { title: "Unknown target", hint: "No skill or meta-skill has this id." },
    not_found: { title: "Not found", hint: "The entity was not in the registry." },
    duplicate_id: { title: "Id taken", hint: "Pick a different id — this one is registered." },
    in_use: { title: "Still referenced", hint: "Remove the meta-skills that use this skill first." },
    invalid_request: { title: "Invalid request", hint: "The request violates the target's format." },
    invalid_descriptor: { title: "Invalid skill", hint: "The skill descriptor has violations." },
    invalid_config: { title: "Invalid composition", hint: "The meta-skill config has violations." },
    unknown_member: { title: "Unknown member", hint: "A member skill id is not registered." },
    unknown_aggregator: { title: "Unknown aggregator", hint: "Use max_confidence or weighted_vote." },
    invalid_corpora: { title: "Invalid corpora", hint: "Every dataset needs at least one question." },
    fusion_failed: { title: "Fusion failed", hint: "Adapters must share names and shapes." },
    no_successful_answers: { title: "No agent answered", hint: "Every member failed or errored." },
    no_eligible_skill: { title: "Nothing to route to", hint: "No dataset in the ranking has skills." },
    router_model_missing: { title: "Router model missing", hint: "Train the router model first." },
    fused_skill_missing: { title: "Fused skill missing", hint: "Run fusion again to re-register it." },
    all_members_timed_out: { title: "All members timed out", hint: "Raise timeout_ms or check agents." },
    network_failure: { title: "Gateway unreachable", hint: "The request never got a response." },
};
export function describeError(status, body) {
    return (ERROR_STYLES[body.error] ?? {
        title: `Unexpected error (HTTP ${status})`,
        hint: body.detail ?? "See the gateway logs.",
    });
}
export function knownErrorCodes() {
    return Object.keys(ERROR_STYLES);
}
export function renderErrorBanner(status, body) {
    const style = describeError(status, body);
    const violations = (body.violations ?? []).map((v) => `<li>${esc(v)}</li>`).join("");
    return `
<div class="banner error" data-error-code="${esc(body.error ?? "unknown")}">
  <strong>${esc(style.title)}</strong>
  <span>${esc(style.hint)}</span>
  ${violations ? `<ul class="violations">${violations}</ul>` : ""}
</div>`.trim();
}
