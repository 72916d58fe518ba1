import assert from "node:assert/strict";
import { test } from "node:test";

import type { AgentAnswer } from "../src/types.js";
import { axisTicks, MIN_BAR_PCT, waterfallBars } from "../src/waterfall.js";

function answer(skillId: string, latencyMs: number, status: AgentAnswer["status"] = "ok"): AgentAnswer {
  return {
    skill_id: skillId,
    answer_text: status === "ok" ? "x" : "",
    confidence: status === "ok" ? 0.5 : 0,
    latency_ms: latencyMs,
    status,
  };
}

test("slowest member spans the full track", () => {
  const bars = waterfallBars([answer("a", 50), answer("b", 200), answer("c", 100)]);
  assert.equal(bars[1].widthPct, 100);
  assert.equal(bars[0].widthPct, 25);
  assert.equal(bars[2].widthPct, 50);
});

test("tiny latencies keep a visible bar", () => {
  const bars = waterfallBars([answer("a", 0.001), answer("b", 1000)]);
  assert.equal(bars[0].widthPct, MIN_BAR_PCT);
});

test("bars keep the input order and status", () => {
  const bars = waterfallBars([answer("a", 10), answer("t", 99, "timeout"), answer("b", 20)]);
  assert.deepEqual(bars.map((b) => b.skillId), ["a", "t", "b"]);
  assert.equal(bars[1].status, "timeout");
});

test("axis ticks are round and cover the range", () => {
  const ticks = axisTicks(470);
  assert.equal(ticks[0], 0);
  assert.ok(ticks.length >= 3 && ticks.length <= 7);
  assert.ok(ticks[ticks.length - 1] <= 470);
  const steps = new Set(ticks.slice(1).map((t, i) => +(t - ticks[i]).toFixed(6)));
  assert.equal(steps.size, 1);
});

test("axis handles zero duration", () => {
  assert.deepEqual(axisTicks(0), [0]);
});
