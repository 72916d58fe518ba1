/**
 * End-to-end smoke against a real gateway with three live mock agents (one
 * configured to outsleep the fan-out timeout). Drives the same modules the
 * page uses — API client, composer submit flow, playground controller and
 * render functions, bench viewer — over real HTTP.
 */
import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { once } from "node:events";
import { readFileSync } from "node:fs";
import { createInterface } from "node:readline";
import { after, before, test } from "node:test";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { createClient } from "../src/api.js";
import { emptyDraft, submitDraft } from "../src/composer.js";
import { parseBenchReport, renderBenchReport } from "../src/benchview.js";
import { PlaygroundController, renderPlayground } from "../src/playground.js";
const HERE = dirname(fileURLToPath(import.meta.url));
const STACK = join(HERE, "..", "..", "test", "stack.py");
const FIXTURES = join(HERE, "..", "..", "test", "fixtures");
let child;
let gatewayUrl = "";
let skillIds = [];
let client;
before(async () => {
    child = spawn("python3", [STACK], { stdio: ["ignore", "pipe", "pipe"] });
    const lines = createInterface({ input: child.stdout });
    const timer = setTimeout(() => child.kill("SIGKILL"), 30_000);
    const [line] = (await once(lines, "line"));
    clearTimeout(timer);
    const info = JSON.parse(line);
    gatewayUrl = info.gateway;
    skillIds = info.skills;
    client = createClient(gatewayUrl);
});
after(() => {
    child?.kill("SIGTERM");
});
test("stack is healthy and lists the three mock skills", async () => {
    const health = await client.health();
    assert.equal(health.status, "ok");
    const skills = await client.listSkills();
    assert.deepEqual(skills.map((s) => s.skill_id).sort(), [...skillIds].sort());
    assert.equal(skills.length, 3);
});
test("composer creates a late-fusion meta-skill over the live gateway", async () => {
    const draft = emptyDraft();
    draft.metaId = "capital-trio";
    draft.strategy = "late_fusion";
    draft.memberSkillIds = [...skillIds];
    draft.timeoutMs = "500"; // the sleeper agent sleeps 3000ms and must time out
    draft.maxConcurrency = "3";
    const outcome = await submitDraft(client, draft);
    assert.equal(outcome.kind, "created");
    const listed = await client.listMetaSkills();
    assert.ok(listed.some((m) => m.meta_id === "capital-trio"));
    // resubmitting the same id surfaces the inline id-taken error from the 409
    const duplicate = await submitDraft(client, draft);
    assert.equal(duplicate.kind, "rejected");
    if (duplicate.kind === "rejected") {
        assert.equal(duplicate.status, 409);
        assert.match(duplicate.errors.metaId ?? "", /id taken/);
    }
});
test("playground renders three member rows, winner highlighted, timeout styled", async () => {
    const controller = new PlaygroundController(client);
    const state = await controller.ask("capital-trio", "What is the capital of France?");
    assert.equal(state.kind, "answered");
    if (state.kind !== "answered")
        return;
    const response = state.response;
    assert.equal(response.final_answer, "Paris");
    assert.equal(response.member_answers.length, 3);
    const sleeper = response.member_answers.find((a) => a.skill_id === "sleeper");
    assert.equal(sleeper?.status, "timeout");
    const html = renderPlayground(state);
    const rows = html.match(/<tr class="member-row[^"]*"/g) ?? [];
    assert.equal(rows.length, 3);
    assert.match(html, /row-winner[^>]*data-skill-id="paris-strong"/);
    assert.match(html, /winner-mark/);
    assert.match(html, /row-failed[^>]*data-skill-id="sleeper"/);
    assert.match(html, /status-timeout/);
    assert.match(html, /final answer<\/span><strong>Paris<\/strong>/);
});
test("bench viewer renders a saved report", () => {
    const raw = readFileSync(join(FIXTURES, "report.json"), "utf-8");
    const report = parseBenchReport(raw);
    const html = renderBenchReport(report);
    const systems = Object.keys(report.systems);
    assert.ok(systems.length >= 2);
    for (const system of systems) {
        assert.ok(html.includes(`data-system="${system}"`), system);
    }
    assert.match(html, /±/);
    assert.match(html, /latency-bar/);
});
test("gateway serves the built UI bundle under /ui/", async () => {
    const res = await fetch(`${gatewayUrl}/ui/`);
    assert.equal(res.status, 200);
    const html = await res.text();
    assert.match(html, /skillmesh/);
    assert.match(html, /main\.js/);
});
