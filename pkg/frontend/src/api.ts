import type {
  Envelope,
  ExplainPayload,
  InstanceSummary,
  SessionConfig,
  SessionPayload,
} from "./types.js";

/** Service-reported or transport failure, keyed by a stable code. */
export class ServiceError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly httpStatus: number,
    /** Present on 422 answer rejections: the session in its FAILED state. */
    readonly session?: SessionPayload,
  ) {
    super(message);
    this.name = "ServiceError";
  }

  /** 409/422 mean our view of the session is stale or the session died. */
  get needsStateRefresh(): boolean {
    return this.httpStatus === 409 || this.httpStatus === 422;
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  let body: Envelope<T>;
  try {
    body = (await response.json()) as Envelope<T>;
  } catch {
    throw new ServiceError(
      "bad_envelope",
      `non-JSON response (HTTP ${response.status})`,
      response.status,
    );
  }
  if (body.status === "OK" && body.payload !== undefined) {
    return body.payload;
  }
  const fault = body.error ?? { code: "bad_envelope", message: "malformed envelope" };
  // inconsistent-answer rejections carry the failed session alongside the error
  const session = (body as { payload?: SessionPayload }).payload;
  throw new ServiceError(fault.code, fault.message, response.status, session);
}

export class Client {
  constructor(readonly baseUrl: string) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}/v1${path}`, init);
    } catch (exc) {
      throw new ServiceError("unreachable", `service unreachable: ${exc}`, 0);
    }
    return unwrap<T>(response);
  }

  listInstances(): Promise<InstanceSummary[]> {
    return this.call("/instances");
  }

  createSession(instanceId: string, config?: SessionConfig): Promise<SessionPayload> {
    return this.call("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ instance_id: instanceId, config: config ?? {} }),
    });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.call(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  postAnswer(
    sessionId: string,
    turn: number,
    variableId: string,
    chosen: string,
  ): Promise<SessionPayload> {
    return this.call(`/sessions/${encodeURIComponent(sessionId)}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ turn, variable_id: variableId, chosen }),
    });
  }

  explain(sessionId: string): Promise<ExplainPayload> {
    return this.call(`/sessions/${encodeURIComponent(sessionId)}/explain`);
  }

  deleteSession(sessionId: string): Promise<{ deleted: string }> {
    return this.call(`/sessions/${encodeURIComponent(sessionId)}`, {
      method: "DELETE",
    });
  }
}
