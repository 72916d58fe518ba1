import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiError, type GatewayClient } from "../src/api.js";
import {
  canSubmit,
  draftToConfig,
  emptyDraft,
  submitDraft,
  validateDraft,
} from "../src/composer.js";
import type { MetaSkillConfig } from "../src/types.js";

function lateFusionDraft() {
  const draft = emptyDraft();
  draft.metaId = "trio";
  draft.memberSkillIds = ["a", "b", "c"];
  return draft;
}

test("empty draft cannot submit", () => {
  const errors = validateDraft(emptyDraft());
  assert.ok(errors.metaId);
  assert.ok(errors.memberSkillIds);
  assert.equal(canSubmit(emptyDraft()), false);
});

test("valid late-fusion draft submits", () => {
  assert.deepEqual(validateDraft(lateFusionDraft()), {});
  assert.equal(canSubmit(lateFusionDraft()), true);
});

test("zero members disables submit", () => {
  const draft = lateFusionDraft();
  draft.memberSkillIds = [];
  assert.equal(canSubmit(draft), false);
});

test("late fusion requires positive integer timeout", () => {
  const draft = lateFusionDraft();
  draft.timeoutMs = "0";
  assert.ok(validateDraft(draft).timeoutMs);
  draft.timeoutMs = "250ms";
  assert.ok(validateDraft(draft).timeoutMs);
});

test("selection requires a router model id", () => {
  const draft = lateFusionDraft();
  draft.strategy = "selection";
  assert.ok(validateDraft(draft).routerModelId);
  draft.routerModelId = "router-1";
  assert.deepEqual(validateDraft(draft), {});
});

test("early fusion requires the fused tensor path", () => {
  const draft = lateFusionDraft();
  draft.strategy = "early_fusion";
  assert.ok(validateDraft(draft).fusedTensorPath);
});

test("draftToConfig emits only the strategy's params", () => {
  const config = draftToConfig(lateFusionDraft());
  assert.deepEqual(config, {
    meta_id: "trio",
    strategy: "late_fusion",
    member_skill_ids: ["a", "b", "c"],
    params: { aggregator: "max_confidence", timeout_ms: 10000, max_concurrency: 8 },
  });
});

function clientStub(overrides: Partial<GatewayClient>): GatewayClient {
  const reject = () => Promise.reject(new Error("not stubbed"));
  return {
    listSkills: reject,
    listMetaSkills: reject,
    createMetaSkill: reject,
    deleteSkill: reject,
    deleteMetaSkill: reject,
    query: reject,
    health: reject,
    fetchBenchReport: reject,
    ...overrides,
  } as GatewayClient;
}

test("submitDraft resolves created on 2xx", async () => {
  let sent: MetaSkillConfig | null = null;
  const client = clientStub({
    createMetaSkill: async (config) => {
      sent = config;
      return config;
    },
  });
  const outcome = await submitDraft(client, lateFusionDraft());
  assert.equal(outcome.kind, "created");
  assert.equal(sent!.meta_id, "trio");
});

test("submitDraft maps duplicate_id onto the id field", async () => {
  const client = clientStub({
    createMetaSkill: async () => {
      throw new ApiError(409, { error: "duplicate_id" });
    },
  });
  const outcome = await submitDraft(client, lateFusionDraft());
  assert.equal(outcome.kind, "rejected");
  if (outcome.kind === "rejected") {
    assert.equal(outcome.status, 409);
    assert.match(outcome.errors.metaId ?? "", /id taken/);
  }
});

test("submitDraft maps config violations onto fields", async () => {
  const client = clientStub({
    createMetaSkill: async () => {
      throw new ApiError(422, {
        error: "invalid_config",
        violations: ["late_fusion timeout_ms must be a positive integer"],
      });
    },
  });
  const outcome = await submitDraft(client, lateFusionDraft());
  assert.equal(outcome.kind, "rejected");
  if (outcome.kind === "rejected") {
    assert.match(outcome.errors.timeoutMs ?? "", /timeout_ms/);
  }
});

test("submitDraft reports network failure without throwing", async () => {
  const client = clientStub({
    createMetaSkill: async () => {
      throw new TypeError("fetch failed");
    },
  });
  const outcome = await submitDraft(client, lateFusionDraft());
  assert.equal(outcome.kind, "network_failure");
});

test("locally invalid draft is rejected without any request", async () => {
  const client = clientStub({}); // every method rejects if called
  const outcome = await submitDraft(client, emptyDraft());
  assert.equal(outcome.kind, "rejected");
});
