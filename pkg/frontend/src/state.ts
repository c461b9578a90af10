/** Pure view-state fold over journal entries.
 *
 * The view is derived from the event stream alone, so replaying the same
 * entries (after a refresh or a reconnect) always rebuilds the same view.
 */

import type {
  IterationRow,
  JournalEntry,
  MatrixCell,
  SessionView,
  TestStatus,
} from "./types.js";

const PRESENTATION_KINDS = new Set(["Initial", "NextTest", "MetaTestUpdate"]);

export function emptyView(): SessionView {
  return {
    sessionId: "",
    problemId: "",
    status: "Running",
    stopReason: null,
    oracleOutcome: null,
    promptsSent: 0,
    lastSeq: 0,
    awaitingHint: false,
    testIds: [],
    runs: [],
    oracleRun: null,
    timeline: [],
    revisions: [],
    transcript: [],
  };
}

/** Apply one journal entry; returns a new view (input is not mutated). */
export function applyEntry(view: SessionView, entry: JournalEntry): SessionView {
  const next: SessionView = {
    ...view,
    testIds: [...view.testIds],
    runs: view.runs.map((run) => ({ ...run })),
    timeline: view.timeline.map((row) => ({ ...row })),
    revisions: [...view.revisions],
    transcript: [...view.transcript],
  };
  next.lastSeq = Math.max(view.lastSeq, entry.seq);
  const payload = entry.payload;
  switch (entry.kind) {
    case "StatusChange": {
      const status = payload.status as string;
      if (status === "Running" && payload.config) {
        next.sessionId = payload.config.session_id ?? entry.session_id;
        next.problemId = payload.config.problem_id ?? "";
        next.status = "Running";
      } else {
        next.status = status;
        next.stopReason = payload.reason ?? null;
        next.oracleOutcome = payload.oracle_outcome ?? next.oracleOutcome;
        next.awaitingHint = false;
      }
      break;
    }
    case "PromptSent": {
      next.promptsSent += 1;
      const row: IterationRow = {
        index: next.timeline.length + 1,
        promptKind: payload.kind,
        failingPrevIds: [],
      };
      if (payload.test_id && PRESENTATION_KINDS.has(payload.kind)) {
        row.testId = payload.test_id;
        addTestId(next, payload.test_id);
      }
      next.timeline.push(row);
      next.transcript.push({
        role: "user",
        text: payload.text,
        seq: entry.seq,
        promptKind: payload.kind,
      });
      next.awaitingHint = false;
      break;
    }
    case "ResponseReceived":
      next.transcript.push({ role: "assistant", text: payload.text, seq: entry.seq });
      break;
    case "CodeExtracted":
      next.revisions.push({
        iteration: next.revisions.length + 1,
        codeText: payload.code_text,
        contentHash: payload.content_hash,
        incomplete: Boolean(payload.incomplete),
      });
      break;
    case "TestReport": {
      const statuses: Record<string, TestStatus> = {};
      for (const [testId, result] of Object.entries<any>(payload.results ?? {})) {
        statuses[testId] = result.status as TestStatus;
      }
      if (payload.scope === "oracle") {
        next.oracleRun = statuses;
      } else {
        next.runs.push(buildColumn(next, statuses));
      }
      break;
    }
    case "Outcome": {
      const row = lastRow(next);
      if (row) {
        row.outcome = payload.kind;
        row.failingPrevIds = payload.failing_prev_ids ?? [];
      }
      break;
    }
    case "HintRequested":
      next.status = "AwaitingHint";
      next.awaitingHint = true;
      break;
    case "HintProvided": {
      next.awaitingHint = false;
      next.status = "Running";
      const row = lastRow(next);
      if (row) row.hintText = payload.text;
      break;
    }
  }
  return next;
}

function lastRow(view: SessionView): IterationRow | undefined {
  return view.timeline[view.timeline.length - 1];
}

/** Register a test id, backfilling earlier run columns so the matrix stays rectangular. */
function addTestId(view: SessionView, testId: string): void {
  if (view.testIds.includes(testId)) return;
  view.testIds.push(testId);
  for (const run of view.runs) {
    if (!(testId in run)) run[testId] = { status: null, regression: false };
  }
}

function buildColumn(
  view: SessionView,
  statuses: Record<string, TestStatus>,
): Record<string, MatrixCell> {
  const column: Record<string, MatrixCell> = {};
  for (const testId of Object.keys(statuses)) {
    addTestId(view, testId);
  }
  for (const testId of view.testIds) {
    const status = statuses[testId] ?? null;
    const passedBefore = view.runs.some((run) => run[testId]?.status === "pass");
    column[testId] = {
      status,
      regression: status !== null && status !== "pass" && passedBefore,
    };
  }
  return column;
}

/** Rebuild the whole view from scratch (a page refresh). */
export function buildView(entries: JournalEntry[]): SessionView {
  return entries.reduce(applyEntry, emptyView());
}

/** Latest code revision and the one before it, for the diff pane. */
export function latestPair(view: SessionView): [string | null, string | null] {
  const n = view.revisions.length;
  return [
    n > 1 ? view.revisions[n - 2].codeText : null,
    n > 0 ? view.revisions[n - 1].codeText : null,
  ];
}
