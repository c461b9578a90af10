/** Dashboard wiring: hash routing, live stream, hint/abort/advance controls. */

import { ApiClient } from "./api.js";
import { applyEntry, buildView } from "./state.js";
import {
  renderDiff,
  renderHeader,
  renderMatrix,
  renderSessionList,
  renderTimeline,
  renderTranscript,
} from "./render.js";
import { streamSession, type StreamHandle } from "./sse.js";
import type { SessionView } from "./types.js";

const api = new ApiClient("");
let stream: StreamHandle | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

async function showList(): Promise<void> {
  stream?.close();
  stream = null;
  const rows = await api.listSessions();
  el("app").innerHTML = `<h2>Sessions</h2>${renderSessionList(rows)}
    <p class="hint-row">Start sessions with the CLI or POST /sessions, then watch them here.</p>`;
}

function renderSession(view: SessionView): void {
  el("app").innerHTML = `
    <p><a href="#/">&larr; all sessions</a></p>
    ${renderHeader(view)}
    <div class="controls">
      <input id="hint-input" type="text" placeholder="implementation hint"
             ${view.awaitingHint ? "" : "disabled"} />
      <button id="hint-send" ${view.awaitingHint ? "" : "disabled"}>send hint</button>
      <button id="abort">abort</button>
      <button id="advance">advance</button>
    </div>
    <div class="columns">
      <section><h3>Iterations</h3>${renderTimeline(view)}</section>
      <section><h3>Test matrix</h3>${renderMatrix(view)}</section>
    </div>
    <div class="columns">
      <section><h3>Current code (diff vs previous)</h3>${renderDiff(view)}</section>
      <section><h3>Transcript</h3>${renderTranscript(view)}</section>
    </div>`;
  el("hint-send").onclick = async () => {
    const input = el("hint-input") as HTMLInputElement;
    if (!input.value.trim()) return;
    try {
      await api.submitHint(view.sessionId, input.value.trim(), crypto.randomUUID());
      input.value = "";
    } catch (err) {
      flash(String(err));
    }
  };
  el("abort").onclick = async () => {
    try {
      await api.abort(view.sessionId, crypto.randomUUID());
    } catch (err) {
      flash(String(err));
    }
  };
  el("advance").onclick = async () => {
    try {
      await api.advance(view.sessionId, crypto.randomUUID());
    } catch (err) {
      flash(String(err));
    }
  };
}

function flash(message: string): void {
  const bar = el("flash");
  bar.textContent = message;
  bar.classList.add("visible");
  setTimeout(() => bar.classList.remove("visible"), 4000);
}

async function showSession(sessionId: string): Promise<void> {
  stream?.close();
  // rebuild the whole view from history, then follow the live tail
  const history = await api.history(sessionId);
  let view = buildView(history);
  renderSession(view);
  stream = streamSession("", sessionId, (entry) => {
    view = applyEntry(view, entry);
    renderSession(view);
  }, { fromSeq: view.lastSeq + 1 });
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/";
  const match = hash.match(/^#\/session\/(.+)$/);
  try {
    if (match) {
      await showSession(decodeURIComponent(match[1]));
    } else {
      await showList();
    }
  } catch (err) {
    el("app").innerHTML = `<p class="error">${String(err)}</p>`;
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
