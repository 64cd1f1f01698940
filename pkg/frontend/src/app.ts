import { Client, ServiceError } from "./api.js";
import { entropyStepChart } from "./chart.js";
import {
  renderBanner,
  renderCandidates,
  renderExplain,
  renderFailed,
  renderFinal,
  renderInstanceOptions,
  renderQuestion,
  renderStatus,
} from "./view.js";
import type { SessionPayload } from "./types.js";

const el = (id: string) => document.getElementById(id) as HTMLElement;

let client = new Client(window.location.origin);
let session: SessionPayload | null = null;
let inFlight = false; // one request per tab; options stay disabled meanwhile

function renderSession(payload: SessionPayload): void {
  session = payload;
  window.location.hash = payload.session_id;
  el("status").innerHTML = renderStatus(payload);
  el("candidates").innerHTML = renderCandidates(payload.candidates);
  el("trace").innerHTML = entropyStepChart(payload.entropy_trace);
  el("question").innerHTML =
    payload.pending_question === null
      ? ""
      : renderQuestion(payload.pending_question, inFlight);
  el("final").innerHTML =
    payload.status === "FAILED"
      ? renderFailed(payload)
      : payload.final === null
        ? ""
        : renderFinal(payload.final);
  el("explain").innerHTML = "";
}

function showError(error: unknown): void {
  const fault =
    error instanceof ServiceError
      ? error
      : new ServiceError("internal", String(error), 0);
  if (fault.session !== undefined) {
    renderSession(fault.session); // answer rejected: show the failed session
    return;
  }
  el("banners").insertAdjacentHTML("beforeend", renderBanner(fault));
}

async function guarded(action: () => Promise<void>): Promise<void> {
  if (inFlight) return;
  inFlight = true;
  if (session?.pending_question) {
    el("question").innerHTML = renderQuestion(session.pending_question, true);
  }
  try {
    await action();
  } catch (error) {
    showError(error);
  } finally {
    inFlight = false;
    if (session?.pending_question) {
      el("question").innerHTML = renderQuestion(session.pending_question, false);
    }
  }
}

async function startSession(): Promise<void> {
  const base = (el("base-url") as HTMLInputElement).value.trim();
  client = new Client(base === "" ? window.location.origin : base);
  const instanceId = (el("instance") as HTMLSelectElement).value;
  const payload = await client.createSession(instanceId, {
    strategy: (el("strategy") as HTMLSelectElement).value,
    tau: Number((el("tau") as HTMLInputElement).value),
    mode: (el("mode") as HTMLSelectElement).value,
  });
  renderSession(payload);
}

async function loadInstances(): Promise<void> {
  const instances = await client.listInstances();
  el("instance").innerHTML = renderInstanceOptions(instances);
}

async function restoreFromHash(): Promise<void> {
  const sessionId = window.location.hash.slice(1);
  if (sessionId === "") return;
  renderSession(await client.getSession(sessionId));
}

el("start").addEventListener("click", () => void guarded(startSession));

el("show-explain").addEventListener("click", () =>
  void guarded(async () => {
    if (session === null) return;
    el("explain").innerHTML = renderExplain(await client.explain(session.session_id));
  }),
);

el("drop").addEventListener("click", () =>
  void guarded(async () => {
    if (session === null) return;
    await client.deleteSession(session.session_id);
    session = null;
    window.location.hash = "";
    for (const id of ["status", "candidates", "trace", "question", "final", "explain"]) {
      el(id).innerHTML = "";
    }
  }),
);

document.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches("button.option") && session?.pending_question) {
    const { turn } = session;
    const variableId = session.pending_question.variable_id;
    const chosen = target.dataset.value ?? "";
    void guarded(async () => {
      renderSession(await client.postAnswer(session!.session_id, turn, variableId, chosen));
    });
  } else if (target.matches("button.dismiss")) {
    target.closest(".banner")?.remove();
  } else if (target.matches("button.refresh") && session !== null) {
    const id = session.session_id;
    target.closest(".banner")?.remove();
    void guarded(async () => renderSession(await client.getSession(id)));
  } else if (target.matches("button.retry")) {
    target.closest(".banner")?.remove();
    void guarded(loadInstances);
  } else if (target.matches("button.copy")) {
    void navigator.clipboard.writeText(target.dataset.sql ?? "");
  }
});

void guarded(async () => {
  await loadInstances();
  await restoreFromHash(); // a hard refresh rebuilds the identical view
});
