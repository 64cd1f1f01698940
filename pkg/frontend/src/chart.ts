/** Entropy trace as an inline SVG step chart. The values are plotted exactly
 * as the service reported them; nothing is recomputed client-side. */
export function entropyStepChart(
  trace: readonly number[],
  width = 320,
  height = 96,
): string {
  if (trace.length === 0) {
    return `<svg class="trace" viewBox="0 0 ${width} ${height}"></svg>`;
  }
  const pad = 8;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const top = Math.max(...trace, 1e-12);
  const x = (i: number) =>
    trace.length === 1 ? pad : pad + (i / (trace.length - 1)) * innerW;
  const y = (v: number) => pad + (1 - v / top) * innerH;

  const first = trace[0] as number;
  let path = `M ${x(0).toFixed(1)} ${y(first).toFixed(1)}`;
  for (let i = 1; i < trace.length; i += 1) {
    // step-after: hold the previous level, then drop at the turn boundary
    path += ` H ${x(i).toFixed(1)} V ${y(trace[i] as number).toFixed(1)}`;
  }
  const line =
    trace.length > 1 ? `<path class="trace-line" d="${path}" fill="none"/>` : "";
  const dots = trace
    .map(
      (value, i) =>
        `<circle class="trace-point" data-v="${value}" ` +
        `cx="${x(i).toFixed(1)}" cy="${y(value).toFixed(1)}" r="3"/>`,
    )
    .join("");
  return `<svg class="trace" viewBox="0 0 ${width} ${height}">${line}${dots}</svg>`;
}
