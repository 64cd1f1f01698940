import { describe, expect, it } from "vitest";

import { ServiceError } from "../src/api.js";
import {
  escapeHtml,
  renderBanner,
  renderCandidates,
  renderExplain,
  renderFailed,
  renderFinal,
  renderInstanceOptions,
  renderQuestion,
  renderStatus,
} from "../src/view.js";
import {
  answerBranchEnvelope,
  createDefaultEnvelope,
  explainFinishedEnvelope,
  explainInitialEnvelope,
  failedResponse,
  finishedEnvelope,
  instancesEnvelope,
} from "./payloads.js";

const initial = createDefaultEnvelope.payload!;
const branch = answerBranchEnvelope.payload!;
const finished = finishedEnvelope.payload!;
const failed = failedResponse.body.payload!;
const explain = explainInitialEnvelope.payload!;

function attrValues(html: string, name: string): string[] {
  return [...html.matchAll(new RegExp(`${name}="([^"]*)"`, "g"))].map((m) => m[1]!);
}

describe("candidate bars", () => {
  it("keeps every payload probability verbatim in the markup", () => {
    const html = renderCandidates(initial.candidates);
    // full precision survives in data-p; only the visible label is rounded
    expect(attrValues(html, "data-p")).toEqual(
      initial.candidates.map((c) => String(c.probability)),
    );
    expect(attrValues(html, "data-id")).toEqual(initial.candidates.map((c) => c.id));
  });

  it("renders one row per candidate with its sql and rank", () => {
    const html = renderCandidates(initial.candidates);
    expect(html.match(/class="candidate"/g)).toHaveLength(4);
    for (const row of initial.candidates) {
      expect(html).toContain(escapeHtml(row.sql));
      expect(html).toContain(`#${row.rank}`);
    }
  });

  it("shows bars 0.50/0.25/0.25 after the heavy-branch answer", () => {
    const html = renderCandidates(branch.candidates);
    const labels = [...html.matchAll(/class="prob">([\d.]+)</g)].map((m) => m[1]);
    expect(labels).toEqual(["0.50", "0.25", "0.25"]);
  });

  it("bar widths cover the whole distribution", () => {
    // payload probabilities must sum to 1, so the bars do too
    const total = initial.candidates.reduce((s, c) => s + c.probability, 0);
    expect(total).toBeCloseTo(1, 9);
  });
});

describe("question card", () => {
  it("renders the question text and every option verbatim", () => {
    const question = initial.pending_question!;
    const html = renderQuestion(question, false);
    expect(html).toContain(escapeHtml(question.text));
    expect(attrValues(html, "data-value")).toEqual(
      question.options.map((o) => o.value),
    );
    expect(html).toContain(">None of these</button>");
    expect(html).not.toContain("disabled");
  });

  it("disables every option while a submission is in flight", () => {
    const html = renderQuestion(initial.pending_question!, true);
    const buttons = html.match(/<button class="option"/g) ?? [];
    const disabled = html.match(/ disabled>/g) ?? [];
    expect(disabled).toHaveLength(buttons.length);
  });
});

describe("status line", () => {
  it("shows the payload entropy at full precision in data-entropy", () => {
    const html = renderStatus(initial);
    expect(attrValues(html, "data-entropy")).toEqual([String(initial.entropy)]);
    expect(html).toContain("1.922 bits over 4 candidate(s)");
    expect(html).toContain("AWAITING_ANSWER");
  });
});

describe("final panel", () => {
  it("prints the final sql with a copy control and the stop reason", () => {
    const html = renderFinal(finished.final!);
    expect(html).toContain(escapeHtml(finished.final!.sql));
    expect(html).toContain('class="copy"');
    expect(html).toContain("stop reason: THRESHOLD");
  });
});

describe("failed view", () => {
  it("highlights the fatal answer in the transcript", () => {
    const html = renderFailed(failed);
    expect(html).toContain(escapeHtml(failed.failure_reason!));
    const fatal = html.match(/<li class="turn fatal">([^<]*)/);
    expect(fatal?.[1]).toContain("&rarr; NONE_OF_THESE");
  });

  it("marks only the last answered turn as fatal", () => {
    const html = renderFailed(failed);
    expect(html.match(/turn fatal/g)).toHaveLength(1);
  });
});

describe("error banner", () => {
  it("is dismissible and carries the error code", () => {
    const html = renderBanner(new ServiceError("unknown_instance", "no such instance", 404));
    expect(html).toContain('data-code="unknown_instance"');
    expect(html).toContain('class="dismiss"');
  });

  it("offers a state refresh on conflict responses", () => {
    const html = renderBanner(new ServiceError("turn_conflict", "expected turn 1, got 0", 409));
    expect(html).toContain('class="refresh"');
  });

  it("offers a retry when the service is unreachable", () => {
    const html = renderBanner(new ServiceError("unreachable", "service unreachable", 0));
    expect(html).toContain('class="retry"');
  });
});

describe("explain table", () => {
  it("keeps every payload gain verbatim and sorts rows by it, descending", () => {
    const html = renderExplain(explain);
    const shown = attrValues(html, "data-eig").map(Number);
    const expected = [...explain.rows.map((r) => r.eig)].sort((a, b) => b - a);
    expect(shown).toEqual(expected);
    for (const row of explain.rows) {
      expect(html).toContain(`data-eig="${row.eig}"`);
    }
  });

  it("highlights the variable the session will ask next", () => {
    const html = renderExplain(explain);
    const selected = html.match(/tr class="selected" data-variable="([^"]*)"/);
    expect(selected?.[1]).toBe(explain.selected_variable);
    expect(html.match(/class="selected"/g)).toHaveLength(1);
  });

  it("prints three-decimal gains including the 0.722 department row", () => {
    const html = renderExplain(explain);
    expect(html).toContain("<td>0.722</td>");
    expect(html).toContain("department = &#39;sales&#39;=0.800");
  });

  it("shows the completion note instead of a table once resolved", () => {
    const html = renderExplain(explainFinishedEnvelope.payload!);
    expect(html).toContain("no decision variables");
    expect(html).not.toContain("<table");
  });
});

describe("instance picker", () => {
  it("lists every instance the service reported", () => {
    const instances = instancesEnvelope.payload!;
    const html = renderInstanceOptions(instances);
    expect(html.match(/<option/g)).toHaveLength(instances.length);
    expect(html).toContain('value="fig3"');
  });
});

describe("html escaping", () => {
  it("neutralizes markup in sql text", () => {
    const html = renderCandidates([
      { id: "x", sql: "SELECT '<b>&'", probability: 1, rank: 1 },
    ]);
    expect(html).toContain("SELECT &#39;&lt;b&gt;&amp;&#39;");
    expect(html).not.toContain("<b>&");
  });
});
