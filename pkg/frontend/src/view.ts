import type {
  CandidateRow,
  ExplainPayload,
  FinalResult,
  InstanceSummary,
  PendingQuestion,
  SessionPayload,
} from "./types.js";
import { ServiceError } from "./api.js";

/** Pure HTML renderers. No numbers are computed here: every value shown is
 * lifted verbatim from a service payload (full precision kept in data-*
 * attributes, display rounding applied only to the visible text). */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderCandidates(rows: CandidateRow[]): string {
  const bars = rows
    .map((row) => {
      const pct = (row.probability * 100).toFixed(1);
      return `
    <div class="candidate" data-id="${escapeHtml(row.id)}" data-p="${row.probability}">
      <span class="rank">#${row.rank}</span>
      <code class="sql">${escapeHtml(row.sql)}</code>
      <div class="meter"><div class="fill" style="width:${pct}%"></div></div>
      <span class="prob">${row.probability.toFixed(2)}</span>
    </div>`;
    })
    .join("\n");
  return `<div class="candidates">${bars}\n</div>`;
}

export function renderQuestion(question: PendingQuestion, disabled: boolean): string {
  const flag = disabled ? " disabled" : "";
  const buttons = question.options
    .map(
      (opt) =>
        `<button class="option" data-value="${escapeHtml(opt.value)}"${flag}>` +
        `${escapeHtml(opt.display)}</button>`,
    )
    .join("\n    ");
  return `
  <div class="question-card" data-variable="${escapeHtml(question.variable_id)}">
    <p class="question-text">${escapeHtml(question.text)}</p>
    ${buttons}
  </div>`;
}

export function renderStatus(payload: SessionPayload): string {
  const badge = payload.status.toLowerCase().replace("_", "-");
  return `
  <span class="badge badge-${badge}">${payload.status}</span>
  <span class="metric">turn ${payload.turn}</span>
  <span class="metric" data-entropy="${payload.entropy}">
    ${payload.entropy.toFixed(3)} bits over ${payload.candidates.length} candidate(s)
  </span>`;
}

export function renderFinal(final: FinalResult): string {
  return `
  <div class="final">
    <h3>final SQL</h3>
    <pre class="final-sql">${escapeHtml(final.sql)}</pre>
    <button class="copy" data-sql="${escapeHtml(final.sql)}">copy</button>
    <span class="stop-reason">stop reason: ${escapeHtml(final.stop_reason)}</span>
  </div>`;
}

export function renderFailed(payload: SessionPayload): string {
  const turns = payload.transcript.turns;
  const fatal = turns.reduce(
    (last, turn, index) => (turn.answer !== null ? index : last),
    -1,
  );
  const items = turns
    .map((turn, index) => {
      const cls = index === fatal ? ' class="turn fatal"' : ' class="turn"';
      const answer = turn.answer === null ? "(unanswered)" : turn.answer;
      return `<li${cls}>${escapeHtml(turn.question.text)} &rarr; ${escapeHtml(answer)}</li>`;
    })
    .join("\n      ");
  return `
  <div class="failed">
    <p class="failure-reason">${escapeHtml(payload.failure_reason ?? "session failed")}</p>
    <ol class="transcript">
      ${items}
    </ol>
  </div>`;
}

export function renderBanner(error: ServiceError): string {
  const hint = error.needsStateRefresh
    ? '<button class="refresh">refresh session state</button>'
    : error.code === "unreachable"
      ? '<button class="retry">retry</button>'
      : "";
  return `
  <div class="banner" data-code="${escapeHtml(error.code)}">
    <span>${escapeHtml(error.message)}</span>
    ${hint}
    <button class="dismiss" aria-label="dismiss">&times;</button>
  </div>`;
}

export function renderExplain(payload: ExplainPayload): string {
  if (payload.rows.length === 0) {
    return `<p class="explain-note">${escapeHtml(payload.note ?? "nothing to ask")}</p>`;
  }
  const rows = [...payload.rows]
    .sort((a, b) => b.eig - a.eig)
    .map((row) => {
      const marginal = Object.entries(row.marginal)
        .map(([value, p]) => `${escapeHtml(value)}=${p.toFixed(3)}`)
        .join("; ");
      const fast = row.fast_path_eig === null ? "-" : row.fast_path_eig.toFixed(3);
      const cls = row.selected ? ' class="selected"' : "";
      return `
      <tr${cls} data-variable="${escapeHtml(row.variable_id)}" data-eig="${row.eig}">
        <td>${escapeHtml(row.variable_id)}</td>
        <td>${row.conditional_entropy.toFixed(3)}</td>
        <td>${row.eig.toFixed(3)}</td>
        <td>${fast}</td>
        <td>${marginal}</td>
      </tr>`;
    })
    .join("");
  return `
  <table class="explain">
    <thead>
      <tr><th>variable</th><th>H(Y|X)</th><th>EIG</th><th>fast-path</th><th>marginal</th></tr>
    </thead>
    <tbody>${rows}
    </tbody>
  </table>`;
}

export function renderInstanceOptions(instances: InstanceSummary[]): string {
  return instances
    .map(
      (inst) =>
        `<option value="${escapeHtml(inst.instance_id)}">` +
        `${escapeHtml(inst.instance_id)} (${escapeHtml(inst.difficulty)}): ` +
        `${escapeHtml(inst.question)}</option>`,
    )
    .join("\n");
}
