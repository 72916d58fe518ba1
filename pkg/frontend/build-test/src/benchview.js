/**
 * Bench report viewer: parse a saved report, sort by any column, and render
 * the comparison as a table plus horizontal latency/F1 bars, values shown to
 * two decimals with their ± std.
 */
import { esc } from "./render.js";
export class ReportParseError extends Error {
}
export function parseBenchReport(raw) {
    let data;
    try {
        data = JSON.parse(raw);
    }
    catch (err) {
        throw new ReportParseError(`not JSON: ${err instanceof Error ? err.message : err}`);
    }
    if (typeof data !== "object" || data === null || !("systems" in data)) {
        throw new ReportParseError("missing top-level \"systems\" object");
    }
    const systems = data.systems;
    if (typeof systems !== "object" || systems === null) {
        throw new ReportParseError("\"systems\" is not an object");
    }
    for (const [systemId, rep] of Object.entries(systems)) {
        if (typeof rep !== "object" ||
            rep === null ||
            typeof rep.mean_latency_ms !== "number" ||
            typeof rep.std_latency_ms !== "number" ||
            typeof rep.f1_mean !== "number") {
            throw new ReportParseError(`system ${systemId} lacks mean/std/f1 numbers`);
        }
    }
    return data;
}
export function sortedRows(report, key, descending = false) {
    const rows = Object.entries(report.systems).map(([system, rep]) => ({ system, report: rep }));
    rows.sort((a, b) => {
        const cmp = key === "system"
            ? a.system.localeCompare(b.system)
            : key === "mean_latency_ms"
                ? a.report.mean_latency_ms - b.report.mean_latency_ms
                : a.report.f1_mean - b.report.f1_mean;
        return descending ? -cmp : cmp;
    });
    return rows;
}
export function formatPlusMinus(mean, std) {
    return `${mean.toFixed(2)} ± ${std.toFixed(2)}`;
}
export function renderBenchReport(report, key = "mean_latency_ms", descending = false) {
    const rows = sortedRows(report, key, descending);
    const maxLatency = Math.max(...rows.map((r) => r.report.mean_latency_ms), 1e-9);
    const body = rows
        .map(({ system, report: rep }) => {
        const latencyPct = ((rep.mean_latency_ms / maxLatency) * 100).toFixed(1);
        return `
<tr data-system="${esc(system)}">
  <td>${esc(system)}</td>
  <td class="num">${formatPlusMinus(rep.mean_latency_ms, rep.std_latency_ms)}</td>
  <td class="num">${rep.f1_mean.toFixed(2)}</td>
  <td class="num">${rep.per_seed.length}</td>
  <td class="num">${rep.failures}</td>
  <td class="bar-cell">
    <div class="bar latency-bar" style="width:${latencyPct}%"></div>
    <div class="bar f1-bar" style="width:${rep.f1_mean.toFixed(1)}%"></div>
  </td>
</tr>`;
    })
        .join("");
    return `
<table class="bench-table" data-sort="${esc(key)}${descending ? ":desc" : ""}">
  <thead>
    <tr>
      <th data-sort-key="system">system</th>
      <th data-sort-key="mean_latency_ms">latency [ms] ± std</th>
      <th data-sort-key="f1_mean">F1</th>
      <th>seeds</th>
      <th>failures</th>
      <th>latency / F1</th>
    </tr>
  </thead>
  <tbody>${body}</tbody>
</table>
<p class="muted env-note">${esc(report.environment)}</p>`.trim();
}
export function renderParseError(err) {
    return `<div class="banner error" data-error-code="report_parse_error">
  <strong>Could not read the report</strong><span>${esc(err.message)}</span>
</div>`;
}
