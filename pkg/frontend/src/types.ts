/** Wire types mirroring the service's journal entries and snapshots. */

export type EntryKind =
  | "PromptSent"
  | "ResponseReceived"
  | "CodeExtracted"
  | "TestReport"
  | "Outcome"
  | "HintRequested"
  | "HintProvided"
  | "StatusChange";

export interface JournalEntry {
  seq: number;
  session_id: string;
  kind: EntryKind;
  timestamp?: string;
  payload: Record<string, any>;
}

export type TestStatus = "pass" | "fail" | "error" | "timeout";

export interface SessionSummary {
  session_id: string;
  problem_id: string;
  status: string;
  last_seq: number;
}

export interface IterationRow {
  /** 1-based iteration counter, one row per prompt sent. */
  index: number;
  promptKind: string;
  testId?: string;
  outcome?: string;
  failingPrevIds: string[];
  hintText?: string;
}

export interface MatrixCell {
  status: TestStatus | null;
  /** true when this test passed in an earlier run and does not pass here */
  regression: boolean;
}

export interface RevisionView {
  iteration: number;
  codeText: string;
  contentHash: string;
  incomplete: boolean;
}

export interface TranscriptTurn {
  role: "user" | "assistant";
  text: string;
  seq: number;
  promptKind?: string;
}

export interface SessionView {
  sessionId: string;
  problemId: string;
  status: string;
  stopReason: string | null;
  oracleOutcome: string | null;
  promptsSent: number;
  lastSeq: number;
  awaitingHint: boolean;
  testIds: string[];
  /** columns, one per driving-suite run; each maps test id -> cell */
  runs: Record<string, MatrixCell>[];
  oracleRun: Record<string, TestStatus> | null;
  timeline: IterationRow[];
  revisions: RevisionView[];
  transcript: TranscriptTurn[];
}
