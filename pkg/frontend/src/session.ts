/**
 * The two console flows: an organizer creating a session and handing out
 * per-agent links, and an agent answering value queries until the
 * allocation lands.
 *
 * Both are plain async functions over the injected client so the whole
 * interaction is scriptable in tests; the DOM layer only renders what
 * these produce.
 */

import {
  ApiRejection,
  GatewayClient,
  type CreateRequest,
  type PendingQuery,
  type ResultView,
  type SessionState,
} from "./api.js";
import { canonicalize } from "./rational.js";

export interface OrganizerResult {
  session: SessionState;
  /** One shareable hash link per agent, in agent order. */
  links: string[];
}

export function agentLink(sid: string, agent: number): string {
  return `#/session/${sid}/agent/${agent}`;
}

/** Create a session and produce one link per agent. */
export async function organizerFlow(
  client: GatewayClient,
  req: CreateRequest,
): Promise<OrganizerResult> {
  const session = await client.createSession(req);
  const links = Array.from({ length: session.n }, (_, k) => agentLink(session.id, k));
  return { session, links };
}

/**
 * Asked whenever it is this agent's turn.  `rejection` carries the
 * gateway's diagnostic when the previous attempt for the same query was
 * refused, so the prompt can explain the re-ask.
 */
export type AnswerFn = (
  pending: PendingQuery,
  rejection: string | null,
) => string | Promise<string>;

export interface LoopOptions {
  sleep?: (ms: number) => Promise<void>;
  pollIntervalMs?: number;
  /** Abort guard: maximum number of polls before giving up. */
  maxPolls?: number;
  onRejection?: (detail: string) => void;
}

export interface LoopOutcome {
  /** Queries this agent answered and the gateway accepted. */
  answered: number;
  /** Submissions the gateway refused (each triggered a re-prompt). */
  rejected: number;
  result: ResultView;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/**
 * Poll the agent view; answer when it is our turn; return the final
 * allocation once the session completes.  Refused answers re-prompt with
 * the gateway's explanation and are never counted as answered.
 */
export async function agentAnswerLoop(
  client: GatewayClient,
  sid: string,
  agent: number,
  answer: AnswerFn,
  opts: LoopOptions = {},
): Promise<LoopOutcome> {
  const sleep = opts.sleep ?? defaultSleep;
  const interval = opts.pollIntervalMs ?? 150;
  const maxPolls = opts.maxPolls ?? 2000;
  let answered = 0;
  let rejected = 0;

  for (let poll = 0; poll < maxPolls; poll++) {
    const view = await client.agentView(sid, agent);
    if (view.status === "completed") {
      return { answered, rejected, result: await client.result(sid) };
    }
    if (view.status === "aborted") {
      throw new Error("session aborted by the protocol");
    }
    if (view.status === "answer_pending" && view.pending) {
      let rejection: string | null = null;
      // retry until the gateway accepts an answer for this query
      for (;;) {
        const raw = await answer(view.pending, rejection);
        const value = canonicalize(raw);
        try {
          await client.submitAnswer(sid, agent, value);
          answered += 1;
          break;
        } catch (err) {
          if (err instanceof ApiRejection && err.status === 400) {
            rejected += 1;
            rejection = err.detail;
            opts.onRejection?.(err.detail);
            continue;
          }
          throw err;
        }
      }
      continue;
    }
    await sleep(interval);
  }
  throw new Error(`agent ${agent} gave up after ${maxPolls} polls`);
}
