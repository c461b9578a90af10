/** HTML renderers for the session view; pure string builders. */

import { diffCode } from "./diff.js";
import { latestPair } from "./state.js";
import type { SessionSummary, SessionView } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderSessionList(rows: SessionSummary[]): string {
  if (!rows.length) return `<p class="empty">No sessions yet.</p>`;
  const items = rows
    .map(
      (row) => `
      <tr>
        <td><a href="#/session/${encodeURIComponent(row.session_id)}">${escapeHtml(row.session_id)}</a></td>
        <td>${escapeHtml(row.problem_id)}</td>
        <td><span class="badge status-${row.status.toLowerCase()}">${row.status}</span></td>
        <td>${row.last_seq}</td>
      </tr>`,
    )
    .join("");
  return `<table class="sessions">
    <thead><tr><th>session</th><th>problem</th><th>status</th><th>events</th></tr></thead>
    <tbody>${items}</tbody></table>`;
}

export function renderTimeline(view: SessionView): string {
  const rows = view.timeline
    .map((row) => {
      const outcome = row.outcome
        ? `<span class="badge outcome-${row.outcome.toLowerCase()}">${row.outcome}</span>`
        : `<span class="badge outcome-pending">…</span>`;
      const detail = [
        row.testId ? `test ${escapeHtml(row.testId)}` : "",
        row.failingPrevIds.length ? `broke ${escapeHtml(row.failingPrevIds.join(", "))}` : "",
        row.hintText ? `hint: ${escapeHtml(row.hintText)}` : "",
      ]
        .filter(Boolean)
        .join(" · ");
      return `<li><span class="iter">#${row.index}</span>
        <span class="kind">${escapeHtml(row.promptKind)}</span> ${outcome}
        <span class="detail">${detail}</span></li>`;
    })
    .join("");
  return `<ol class="timeline">${rows}</ol>`;
}

export function renderMatrix(view: SessionView): string {
  if (!view.testIds.length) return `<p class="empty">No tests presented yet.</p>`;
  const header = view.runs.map((_, i) => `<th>run ${i + 1}</th>`).join("");
  const body = view.testIds
    .map((testId) => {
      const cells = view.runs
        .map((run) => {
          const cell = run[testId];
          if (!cell || cell.status === null) return `<td class="cell none">·</td>`;
          const classes = ["cell", cell.status, cell.regression ? "regression" : ""]
            .filter(Boolean)
            .join(" ");
          const mark = { pass: "✓", fail: "✗", error: "!", timeout: "⏱" }[cell.status];
          return `<td class="${classes}" title="${cell.regression ? "was passing before" : cell.status}">${mark}</td>`;
        })
        .join("");
      const oracle = view.oracleRun
        ? `<td class="cell oracle ${view.oracleRun[testId] ?? "none"}">${view.oracleRun[testId] ?? ""}</td>`
        : "";
      return `<tr><th>${escapeHtml(testId)}</th>${cells}${oracle}</tr>`;
    })
    .join("");
  const oracleHead = view.oracleRun ? "<th>oracle</th>" : "";
  return `<table class="matrix"><thead><tr><th></th>${header}${oracleHead}</tr></thead>
    <tbody>${body}</tbody></table>`;
}

export function renderDiff(view: SessionView): string {
  const [before, after] = latestPair(view);
  if (after === null) return `<p class="empty">No code yet.</p>`;
  if (before === null) {
    return `<pre class="code">${escapeHtml(after)}</pre>`;
  }
  const rows = diffCode(before, after)
    .map((row) => {
      const spans = row.spans
        .map((span) =>
          span.changed
            ? `<mark>${escapeHtml(span.text)}</mark>`
            : escapeHtml(span.text),
        )
        .join("");
      const sign = { same: " ", del: "-", add: "+" }[row.type];
      return `<div class="diff-${row.type}">${sign} ${spans}</div>`;
    })
    .join("");
  return `<pre class="code diff">${rows}</pre>`;
}

export function renderTranscript(view: SessionView): string {
  const turns = view.transcript
    .map(
      (turn) => `
      <div class="turn ${turn.role}">
        <div class="who">${turn.role}${turn.promptKind ? ` · ${escapeHtml(turn.promptKind)}` : ""}</div>
        <pre>${escapeHtml(turn.text)}</pre>
      </div>`,
    )
    .join("");
  return `<div class="transcript">${turns}</div>`;
}

export function renderHeader(view: SessionView): string {
  const reason = view.stopReason ? ` (${escapeHtml(view.stopReason)})` : "";
  const oracle = view.oracleOutcome ? ` · oracle: ${escapeHtml(view.oracleOutcome)}` : "";
  return `<h2>${escapeHtml(view.sessionId)} · ${escapeHtml(view.problemId)}</h2>
    <p><span class="badge status-${view.status.toLowerCase()}">${view.status}</span>${reason}
    · ${view.promptsSent} prompts${oracle}</p>`;
}
