/**
 * Query playground: send a question to a target, render the final answer
 * prominently next to the full per-agent breakdown, a latency waterfall,
 * and (for selection targets) the routing panel.
 *
 * One query is in flight per panel; a response whose request_id no longer
 * matches the active request is discarded as stale.
 */
import { ApiError } from "./api.js";
import { renderErrorBanner } from "./errors.js";
import { esc, fmtConfidence, fmtMs } from "./render.js";
import { waterfallBars } from "./waterfall.js";
export class PlaygroundController {
    constructor(client, onChange = () => { }) {
        this.client = client;
        this.onChange = onChange;
        this.state = { kind: "idle" };
        this.counter = 0;
    }
    current() {
        return this.state;
    }
    /** Issue a query; superseded in-flight responses are dropped. */
    async ask(targetId, question, context) {
        this.counter += 1;
        const requestId = `ui-${this.counter}`;
        this.setState({ kind: "pending", requestId });
        const request = { question, request_id: requestId };
        if (context && context.trim()) {
            request.context = context;
        }
        try {
            const response = await this.client.query(targetId, request);
            if (this.isStale(requestId))
                return this.state;
            this.setState({ kind: "answered", response });
        }
        catch (err) {
            if (this.isStale(requestId))
                return this.state;
            if (err instanceof ApiError) {
                this.setState({ kind: "failed", status: err.status, body: err.body });
            }
            else {
                this.setState({
                    kind: "failed",
                    status: 0,
                    body: { error: "network_failure", detail: String(err) },
                });
            }
        }
        return this.state;
    }
    isStale(requestId) {
        return !(this.state.kind === "pending" && this.state.requestId === requestId);
    }
    setState(state) {
        this.state = state;
        this.onChange(state);
    }
}
function statusBadge(answer) {
    const label = answer.status === "ok" ? "ok" : answer.status;
    return `<span class="status status-${esc(answer.status)}">${esc(label)}</span>`;
}
export function renderMemberTable(response) {
    const winnerRow = (a) => a.status === "ok" &&
        a.skill_id === winningSkillId(response) &&
        a.answer_text === response.final_answer;
    const rows = response.member_answers
        .map((a) => {
        const classes = [
            "member-row",
            a.status !== "ok" ? "row-failed" : "",
            winnerRow(a) ? "row-winner" : "",
        ]
            .filter(Boolean)
            .join(" ");
        return `
<tr class="${classes}" data-skill-id="${esc(a.skill_id)}">
  <td>${esc(a.skill_id)}${winnerRow(a) ? ' <span class="winner-mark">winner</span>' : ""}</td>
  <td>${a.status === "ok" ? esc(a.answer_text) : `<em>${esc(a.error_message ?? "no answer")}</em>`}</td>
  <td class="num">${a.status === "ok" ? fmtConfidence(a.confidence) : "—"}</td>
  <td>${statusBadge(a)}</td>
  <td class="num">${fmtMs(a.latency_ms)}</td>
</tr>`;
    })
        .join("");
    return `
<table class="member-table">
  <thead><tr><th>skill</th><th>answer</th><th>confidence</th><th>status</th><th>latency</th></tr></thead>
  <tbody>${rows}</tbody>
</table>`.trim();
}
/** The winner is whichever ok member carries the final answer (earliest such). */
export function winningSkillId(response) {
    for (const a of response.member_answers) {
        if (a.status === "ok" && a.answer_text === response.final_answer) {
            return a.skill_id;
        }
    }
    return null;
}
export function renderWaterfall(response) {
    const bars = waterfallBars(response.member_answers)
        .map((bar) => `
<div class="wf-row">
  <span class="wf-label">${esc(bar.skillId)}</span>
  <div class="wf-track"><div class="wf-bar wf-${esc(bar.status)}" style="width:${bar.widthPct.toFixed(1)}%"></div></div>
  <span class="wf-ms">${fmtMs(bar.latencyMs)}</span>
</div>`)
        .join("");
    return `<div class="waterfall">${bars}</div>`;
}
export function renderRoutePanel(response) {
    if (!response.route)
        return "";
    const route = response.route;
    const rows = route.ranked
        .map(([tag, score]) => `
<tr class="${tag === route.predicted_dataset ? "row-winner" : ""}">
  <td>${esc(tag)}</td><td class="num">${score.toFixed(4)}</td>
</tr>`)
        .join("");
    return `
<div class="route-panel">
  <h3>Routing: <code>${esc(route.predicted_dataset)}</code>${route.fallback_used ? ' <span class="status status-timeout">fallback</span>' : ""}</h3>
  <table class="route-table">
    <thead><tr><th>dataset</th><th>cosine</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
</div>`.trim();
}
export function renderVoteTable(response) {
    if (!response.vote_table)
        return "";
    const rows = Object.entries(response.vote_table)
        .sort((a, b) => b[1] - a[1])
        .map(([key, vote]) => `<tr><td>${esc(key || "(empty)")}</td><td class="num">${vote.toFixed(2)}</td></tr>`)
        .join("");
    return `
<div class="vote-panel">
  <h3>Vote table</h3>
  <table class="vote-table"><thead><tr><th>normalized answer</th><th>votes</th></tr></thead><tbody>${rows}</tbody></table>
</div>`.trim();
}
export function renderPlayground(state) {
    switch (state.kind) {
        case "idle":
            return `<p class="muted">Pick a target and ask a question.</p>`;
        case "pending":
            return `<p class="muted spinner" data-request-id="${esc(state.requestId)}">querying…</p>`;
        case "failed":
            return `
${renderErrorBanner(state.status, state.body)}
<button class="retry" data-action="retry">retry</button>`.trim();
        case "answered": {
            const r = state.response;
            return `
<div class="final-answer"><span class="label">final answer</span><strong>${esc(r.final_answer)}</strong>
  <span class="muted">${esc(r.strategy)} · ${fmtMs(r.timings.total_ms)}</span></div>
${renderMemberTable(r)}
${renderWaterfall(r)}
${renderRoutePanel(r)}
${renderVoteTable(r)}`.trim();
        }
    }
}
