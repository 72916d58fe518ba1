import assert from "node:assert/strict";
import { test } from "node:test";
import { describeError, knownErrorCodes, renderErrorBanner } from "../src/errors.js";
// every error the gateway documents, by status code family
const GATEWAY_CODES = [
    "unknown_target",
    "not_found",
    "duplicate_id",
    "in_use",
    "invalid_request",
    "invalid_descriptor",
    "invalid_config",
    "unknown_member",
    "unknown_aggregator",
    "invalid_corpora",
    "fusion_failed",
    "no_successful_answers",
    "no_eligible_skill",
    "router_model_missing",
    "fused_skill_missing",
    "all_members_timed_out",
];
test("every documented gateway code has a rendering", () => {
    const known = new Set(knownErrorCodes());
    for (const code of GATEWAY_CODES) {
        assert.ok(known.has(code), `missing rendering for ${code}`);
    }
});
test("renderings are pairwise distinct", () => {
    const titles = GATEWAY_CODES.map((code) => describeError(500, { error: code }).title);
    assert.equal(new Set(titles).size, titles.length);
});
test("banner carries the code and violations", () => {
    const html = renderErrorBanner(422, {
        error: "invalid_config",
        violations: ["late_fusion timeout_ms must be a positive integer"],
    });
    assert.match(html, /data-error-code="invalid_config"/);
    assert.match(html, /timeout_ms/);
});
test("unknown codes fall back to an explicit unexpected-error state", () => {
    const description = describeError(500, { error: "mystery_code" });
    assert.match(description.title, /Unexpected error/);
});
test("banner escapes injected markup", () => {
    const html = renderErrorBanner(422, {
        error: "invalid_config",
        violations: ["<script>alert(1)</script>"],
    });
    assert.ok(!html.includes("<script>"));
});
