/**
 * Latency waterfall geometry: member calls run in parallel, so every bar
 * starts at zero and its width is the member's own latency_ms relative to
 * the slowest one (not server timestamps — the wire already carries
 * per-answer latency).
 */
export const MIN_BAR_PCT = 2;
export function waterfallBars(answers) {
    const scale = Math.max(...answers.map((a) => a.latency_ms), 1e-9);
    return answers.map((a) => ({
        skillId: a.skill_id,
        widthPct: Math.max((a.latency_ms / scale) * 100, MIN_BAR_PCT),
        latencyMs: a.latency_ms,
        status: a.status,
    }));
}
/** Axis tick positions in ms, a handful of round steps up to the max. */
export function axisTicks(maxMs, target = 4) {
    if (maxMs <= 0)
        return [0];
    const rawStep = maxMs / target;
    const magnitude = 10 ** Math.floor(Math.log10(rawStep));
    const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rawStep) ?? rawStep;
    const ticks = [];
    for (let t = 0; t <= maxMs + 1e-9; t += step) {
        ticks.push(Number(t.toFixed(6)));
    }
    return ticks;
}
