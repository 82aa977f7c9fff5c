/**
 * Pure rendering: every function maps view data to an HTML string.
 * Keeping this layer free of document access makes it unit-testable;
 * main.ts owns the live DOM and event wiring.
 */

import type { PendingQuery, ResultView, SessionState } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Goods as chips plus a count badge; ranges arrive pre-rendered. */
export function renderChips(goods: string[], rendered: string): string {
  const chips = goods
    .map((label) => `<span class="chip">${escapeHtml(label)}</span>`)
    .join("");
  return (
    `<div class="chips">${chips}` +
    `<span class="count">${goods.length} good${goods.length === 1 ? "" : "s"}</span></div>` +
    `<div class="range">${escapeHtml(rendered)}</div>`
  );
}

export function renderPrompt(pending: PendingQuery, rejection: string | null): string {
  const note = rejection
    ? `<p class="rejection">Answer refused: ${escapeHtml(rejection)}</p>`
    : "";
  return (
    `<h2>What is your value for:</h2>` +
    renderChips(pending.goods, pending.rendered) +
    note +
    `<form id="answer-form">` +
    `<input id="value-input" autocomplete="off" placeholder="e.g. 7 or 22/7" />` +
    `<button type="submit">Submit</button>` +
    `</form>`
  );
}

export function renderWaiting(state: SessionState, agent: number): string {
  const turn = state.pending ? `agent ${state.pending.agent + 1}` : "the protocol";
  return (
    `<p class="waiting">You are agent ${agent + 1}. Waiting on ${turn}; ` +
    `${state.answered} answer${state.answered === 1 ? "" : "s"} so far.</p>`
  );
}

export function renderResult(result: ResultView): string {
  const rows = result.bundles
    .map(
      (b, i) =>
        `<li><strong>Agent ${i + 1}</strong> receives ${escapeHtml(b)}</li>`,
    )
    .join("");
  return (
    `<h2>Final allocation</h2><ul class="allocation">${rows}</ul>` +
    `<p class="meta">${result.queries} value queries were asked in total.</p>`
  );
}

export function renderLinks(links: string[]): string {
  const rows = links
    .map(
      (href, k) =>
        `<li>Agent ${k + 1}: <a href="${escapeHtml(href)}">${escapeHtml(href)}</a></li>`,
    )
    .join("");
  return `<h2>Share one link with each agent</h2><ol class="links">${rows}</ol>`;
}

export function renderError(detail: string): string {
  return `<p class="error">${escapeHtml(detail)}</p>`;
}

export function renderHistory(history: { rendered: string; value: string }[]): string {
  if (history.length === 0) {
    return "";
  }
  const rows = history
    .map((h) => `<li>${escapeHtml(h.rendered)}: <code>${escapeHtml(h.value)}</code></li>`)
    .join("");
  return `<h3>Your answers</h3><ul class="history">${rows}</ul>`;
}
