/**
 * Typed client for the session gateway HTTP API.
 *
 * The fetch implementation is injected so tests can fake the gateway and
 * the browser build can pass window.fetch straight through.  The client
 * adds no state of its own; every view comes from the server.
 */

export interface PendingQuery {
  agent: number;
  goods: string[];
  rendered: string;
  size: number;
}

export interface SessionState {
  id: string;
  protocol: string;
  n: number;
  m: number;
  labels: string[];
  status: "awaiting_answer" | "completed" | "aborted";
  pending: PendingQuery | null;
  answered: number;
  per_agent: number[];
  abort_reason: string | null;
}

export interface AgentView {
  id: string;
  agent: number;
  status: "answer_pending" | "waiting" | "completed" | "aborted";
  pending: PendingQuery | null;
  history: { goods: string[]; rendered: string; value: string }[];
}

export interface ResultView {
  id: string;
  protocol: string;
  allocation: number[][];
  bundles: string[];
  queries: number;
  per_agent: number[];
  tie_break_seed: number;
}

export interface CreateRequest {
  protocol: string;
  n: number;
  m: number;
  labels?: string[];
  seed?: number;
  options?: Record<string, unknown>;
  line?: number[];
}

/** Structural subset of WHATWG fetch; window.fetch and node fetch satisfy it. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

/** A non-2xx gateway response, carrying the server's diagnostic. */
export class ApiRejection extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`gateway ${status}: ${detail}`);
    this.name = "ApiRejection";
  }
}

export class GatewayClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await resp.json()) as Record<string, unknown>;
    if (resp.status >= 400) {
      const detail = typeof payload?.detail === "string" ? payload.detail : JSON.stringify(payload);
      throw new ApiRejection(resp.status, detail);
    }
    return payload as T;
  }

  createSession(req: CreateRequest): Promise<SessionState> {
    return this.request<SessionState>("POST", "/sessions", req);
  }

  sessionState(sid: string): Promise<SessionState> {
    return this.request<SessionState>("GET", `/sessions/${sid}`);
  }

  agentView(sid: string, agent: number): Promise<AgentView> {
    return this.request<AgentView>("GET", `/sessions/${sid}/agents/${agent}`);
  }

  submitAnswer(sid: string, agent: number, value: string): Promise<SessionState> {
    return this.request<SessionState>("POST", `/sessions/${sid}/answers`, { agent, value });
  }

  result(sid: string): Promise<ResultView> {
    return this.request<ResultView>("GET", `/sessions/${sid}/result`);
  }
}
