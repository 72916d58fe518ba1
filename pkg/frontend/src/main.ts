/**
 * DOM wiring for the single-page UI. All data comes from the gateway's
 * public JSON API relative to this page's origin (override with
 * window.SKILLMESH_BASE before loading), so a reload rebuilds everything
 * from GETs alone.
 */

import { createClient } from "./api.js";
import {
  canSubmit,
  type ComposerDraft,
  submitDraft,
  validateDraft,
} from "./composer.js";
import {
  parseBenchReport,
  renderBenchReport,
  renderParseError,
  ReportParseError,
  type SortKey,
} from "./benchview.js";
import { renderErrorBanner } from "./errors.js";
import { PlaygroundController, renderPlayground } from "./playground.js";
import { esc } from "./render.js";
import type { MetaSkillConfig, SkillDescriptor } from "./types.js";

declare global {
  interface Window {
    SKILLMESH_BASE?: string;
  }
}

const client = createClient(window.SKILLMESH_BASE ?? "");

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector<T>(selector);
  if (!el) throw new Error(`missing element: ${selector}`);
  return el;
};

// -- tabs -------------------------------------------------------------

for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
  button.addEventListener("click", () => {
    for (const other of document.querySelectorAll("nav button")) {
      other.classList.toggle("active", other === button);
    }
    for (const panel of document.querySelectorAll<HTMLElement>("main > section")) {
      panel.hidden = panel.id !== button.dataset.panel;
    }
  });
}

// -- skills and meta-skills lists ---------------------------------------

let skills: SkillDescriptor[] = [];
let metaSkills: MetaSkillConfig[] = [];

function renderSkillLists(): void {
  $("#skill-list").innerHTML =
    skills
      .map(
        (s) => `
<tr>
  <td><code>${esc(s.skill_id)}</code></td>
  <td>${esc(s.display_name || s.skill_id)}</td>
  <td>${esc(s.format)}</td>
  <td>${s.trained_on.map((t) => `<span class="tag">${esc(t)}</span>`).join(" ")}</td>
  <td class="muted">${esc(s.endpoint)}</td>
</tr>`,
      )
      .join("") || `<tr><td colspan="5" class="muted">no skills registered yet</td></tr>`;

  $("#meta-list").innerHTML =
    metaSkills
      .map(
        (m) => `
<tr>
  <td><code>${esc(m.meta_id)}</code></td>
  <td><span class="tag strategy-${esc(m.strategy)}">${esc(m.strategy)}</span></td>
  <td>${m.member_skill_ids.map((id) => `<code>${esc(id)}</code>`).join(", ")}</td>
</tr>`,
      )
      .join("") || `<tr><td colspan="3" class="muted">nothing composed yet</td></tr>`;

  const memberBox = $("#composer-members");
  memberBox.innerHTML = skills
    .map(
      (s) => `
<label class="member-option">
  <input type="checkbox" value="${esc(s.skill_id)}" /> <code>${esc(s.skill_id)}</code>
  <span class="muted">${esc(s.format)}</span>
</label>`,
    )
    .join("");
  memberBox
    .querySelectorAll("input")
    .forEach((box) => box.addEventListener("change", syncComposer));

  const targets = [...metaSkills.map((m) => m.meta_id), ...skills.map((s) => s.skill_id)];
  $("#playground-target").innerHTML = targets
    .map((t) => `<option value="${esc(t)}">${esc(t)}</option>`)
    .join("");
}

async function refreshLists(): Promise<void> {
  try {
    [skills, metaSkills] = await Promise.all([client.listSkills(), client.listMetaSkills()]);
    $("#connection-banner").innerHTML = "";
  } catch (err) {
    $("#connection-banner").innerHTML = renderErrorBanner(0, {
      error: "network_failure",
      detail: String(err),
    });
  }
  renderSkillLists();
}

// -- composer ------------------------------------------------------------

function readDraft(): ComposerDraft {
  const members = [
    ...document.querySelectorAll<HTMLInputElement>("#composer-members input:checked"),
  ].map((box) => box.value);
  return {
    metaId: $<HTMLInputElement>("#composer-id").value,
    strategy: $<HTMLSelectElement>("#composer-strategy").value as ComposerDraft["strategy"],
    memberSkillIds: members,
    routerModelId: $<HTMLInputElement>("#composer-router-model").value,
    scoreThreshold: $<HTMLInputElement>("#composer-threshold").value,
    fusedTensorPath: $<HTMLInputElement>("#composer-tensor-path").value,
    aggregator: $<HTMLSelectElement>("#composer-aggregator").value,
    timeoutMs: $<HTMLInputElement>("#composer-timeout").value,
    maxConcurrency: $<HTMLInputElement>("#composer-concurrency").value,
  };
}

function showFieldErrors(errors: Record<string, string | undefined>): void {
  for (const el of document.querySelectorAll<HTMLElement>("[data-error-for]")) {
    const field = el.dataset.errorFor ?? "";
    el.textContent = errors[field] ?? "";
  }
}

function syncComposer(): void {
  const draft = readDraft();
  for (const section of document.querySelectorAll<HTMLElement>("[data-strategy-params]")) {
    section.hidden = section.dataset.strategyParams !== draft.strategy;
  }
  $<HTMLButtonElement>("#composer-submit").disabled = !canSubmit(draft);
  showFieldErrors(validateDraft(draft));
}

for (const selector of [
  "#composer-id",
  "#composer-strategy",
  "#composer-router-model",
  "#composer-threshold",
  "#composer-tensor-path",
  "#composer-aggregator",
  "#composer-timeout",
  "#composer-concurrency",
]) {
  $(selector).addEventListener("input", syncComposer);
  $(selector).addEventListener("change", syncComposer);
}

$("#composer-form").addEventListener("submit", async (event) => {
  event.preventDefault();
  const draft = readDraft();
  const outcome = await submitDraft(client, draft);
  const banner = $("#composer-banner");
  if (outcome.kind === "created") {
    banner.innerHTML = `<div class="banner ok">created <code>${esc(outcome.created.meta_id)}</code></div>`;
    showFieldErrors({});
    $<HTMLInputElement>("#composer-id").value = "";
    await refreshLists();
    syncComposer();
  } else if (outcome.kind === "rejected") {
    showFieldErrors(outcome.errors as Record<string, string>);
    banner.innerHTML = outcome.errors.form
      ? `<div class="banner error">${esc(outcome.errors.form)}</div>`
      : "";
  } else {
    // draft stays untouched; just tell the user
    banner.innerHTML = renderErrorBanner(0, {
      error: "network_failure",
      detail: outcome.message,
    });
  }
});

// -- playground ------------------------------------------------------------

const playground = new PlaygroundController(client, (state) => {
  $("#playground-output").innerHTML = renderPlayground(state);
  const retry = document.querySelector<HTMLButtonElement>("#playground-output .retry");
  retry?.addEventListener("click", ask);
});

function ask(): void {
  const target = $<HTMLSelectElement>("#playground-target").value;
  const question = $<HTMLInputElement>("#playground-question").value;
  const context = $<HTMLTextAreaElement>("#playground-context").value;
  if (!target || !question.trim()) return;
  void playground.ask(target, question, context);
}

$("#playground-form").addEventListener("submit", (event) => {
  event.preventDefault();
  ask();
});

// -- bench viewer -------------------------------------------------------------

let currentSort: { key: SortKey; descending: boolean } = {
  key: "mean_latency_ms",
  descending: false,
};
let currentReportRaw: string | null = null;

function renderBench(): void {
  const target = $("#bench-output");
  if (currentReportRaw === null) {
    target.innerHTML = `<p class="muted">load a report.json produced by the bench harness</p>`;
    return;
  }
  try {
    const report = parseBenchReport(currentReportRaw);
    target.innerHTML = renderBenchReport(report, currentSort.key, currentSort.descending);
    for (const th of target.querySelectorAll<HTMLElement>("[data-sort-key]")) {
      th.addEventListener("click", () => {
        const key = th.dataset.sortKey as SortKey;
        currentSort = {
          key,
          descending: currentSort.key === key ? !currentSort.descending : false,
        };
        renderBench();
      });
    }
  } catch (err) {
    if (err instanceof ReportParseError) {
      target.innerHTML = renderParseError(err);
    } else {
      throw err;
    }
  }
}

$("#bench-file").addEventListener("change", async (event) => {
  const file = (event.target as HTMLInputElement).files?.[0];
  if (!file) return;
  currentReportRaw = await file.text();
  renderBench();
});

$("#bench-load").addEventListener("click", async () => {
  const url = $<HTMLInputElement>("#bench-url").value.trim();
  if (!url) return;
  try {
    const res = await fetch(url);
    currentReportRaw = await res.text();
  } catch (err) {
    currentReportRaw = `fetch failed: ${err}`;
  }
  renderBench();
});

// -- boot ------------------------------------------------------------------

void refreshLists().then(syncComposer);
renderBench();
