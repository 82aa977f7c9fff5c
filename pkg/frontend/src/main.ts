/**
 * Browser wiring: hash routes for the organizer page and the per-agent
 * answer pane.  All protocol state lives in the gateway; this file only
 * connects DOM events to the flows in session.ts.
 */

import { ApiRejection, GatewayClient, type PendingQuery } from "./api.js";
import {
  renderError,
  renderHistory,
  renderLinks,
  renderPrompt,
  renderResult,
  renderWaiting,
} from "./dom.js";
import { agentAnswerLoop, organizerFlow } from "./session.js";

const client = new GatewayClient("", (url, init) => fetch(url, init));

function app(): HTMLElement {
  const el = document.getElementById("app");
  if (!el) throw new Error("missing #app container");
  return el;
}

// -- organizer ----------------------------------------------------------

function organizerForm(): string {
  return `
    <h2>Start a session</h2>
    <form id="create-form">
      <label>Protocol <input id="f-protocol" value="two_agent_ef1" /></label>
      <label>Agents <input id="f-n" type="number" value="2" min="1" /></label>
      <label>Good labels (comma separated)
        <input id="f-labels" value="lamp, vase, sofa, desk, rug, fan" /></label>
      <label>Seed <input id="f-seed" type="number" value="0" /></label>
      <button type="submit">Create</button>
    </form>
    <div id="create-error"></div>`;
}

function showOrganizer(): void {
  app().innerHTML = organizerForm();
  const form = document.getElementById("create-form") as HTMLFormElement;
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const val = (id: string) => (document.getElementById(id) as HTMLInputElement).value;
    const labels = val("f-labels")
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
    try {
      const { session, links } = await organizerFlow(client, {
        protocol: val("f-protocol").trim(),
        n: Number(val("f-n")),
        m: labels.length,
        labels,
        seed: Number(val("f-seed")),
      });
      app().innerHTML = renderLinks(links) + `<div id="live"></div>`;
      void watchSession(session.id);
    } catch (err) {
      const detail = err instanceof ApiRejection ? err.detail : String(err);
      const slot = document.getElementById("create-error");
      if (slot) slot.innerHTML = renderError(detail);
    }
  });
}

async function watchSession(sid: string): Promise<void> {
  for (;;) {
    const state = await client.sessionState(sid);
    const slot = document.getElementById("live");
    if (!slot) return; // user navigated away
    if (state.status === "completed") {
      slot.innerHTML = renderResult(await client.result(sid));
      return;
    }
    slot.innerHTML = renderWaiting(state, -1);
    await new Promise((r) => setTimeout(r, 500));
  }
}

// -- agent ---------------------------------------------------------------

/** Resolve each prompt from the answer form; the loop drives the rest. */
async function showAgent(sid: string, agent: number): Promise<void> {
  const pane = app();

  const promptUser = (pending: PendingQuery, rejection: string | null) =>
    new Promise<string>((resolve) => {
      void client.agentView(sid, agent).then((view) => {
        pane.innerHTML = renderPrompt(pending, rejection) + renderHistory(view.history);
        const form = document.getElementById("answer-form") as HTMLFormElement;
        const input = document.getElementById("value-input") as HTMLInputElement;
        input.focus();
        form.addEventListener(
          "submit",
          (ev) => {
            ev.preventDefault();
            resolve(input.value);
          },
          { once: true },
        );
      });
    });

  try {
    const outcome = await agentAnswerLoop(client, sid, agent, promptUser, {
      pollIntervalMs: 400,
      onRejection: () => undefined,
    });
    const view = await client.agentView(sid, agent);
    pane.innerHTML = renderResult(outcome.result) + renderHistory(view.history);
  } catch (err) {
    const detail = err instanceof ApiRejection ? err.detail : String(err);
    pane.innerHTML = renderError(detail);
  }
}

// -- routing ---------------------------------------------------------------

function route(): void {
  const hash = window.location.hash;
  const m = /^#\/session\/([^/]+)\/agent\/(\d+)$/.exec(hash);
  if (m) {
    void showAgent(m[1]!, Number(m[2]));
  } else {
    showOrganizer();
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
