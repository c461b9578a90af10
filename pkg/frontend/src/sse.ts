/** Event-stream subscription that resumes from the last applied seq.
 *
 * Reconnects request `from_seq = lastSeq + 1`, and the tracker drops any
 * replayed or out-of-order entries, so a dropped connection never produces
 * duplicate rows.
 */

import type { JournalEntry } from "./types.js";

export class SeqTracker {
  lastSeq = 0;

  /** true when the entry is new and should be applied */
  accept(seq: number): boolean {
    if (seq <= this.lastSeq) return false;
    this.lastSeq = seq;
    return true;
  }
}

export interface StreamHandle {
  close(): void;
}

export function streamSession(
  baseUrl: string,
  sessionId: string,
  onEntry: (entry: JournalEntry) => void,
  options: { fromSeq?: number; reconnectDelayMs?: number } = {},
): StreamHandle {
  const tracker = new SeqTracker();
  tracker.lastSeq = (options.fromSeq ?? 1) - 1;
  const delay = options.reconnectDelayMs ?? 1000;
  let source: EventSource | null = null;
  let closed = false;

  const connect = () => {
    if (closed) return;
    const from = tracker.lastSeq + 1;
    source = new EventSource(
      `${baseUrl}/sessions/${encodeURIComponent(sessionId)}/events?from_seq=${from}`,
    );
    source.onmessage = handle;
    for (const kind of [
      "PromptSent",
      "ResponseReceived",
      "CodeExtracted",
      "TestReport",
      "Outcome",
      "HintRequested",
      "HintProvided",
      "StatusChange",
    ]) {
      source.addEventListener(kind, handle as EventListener);
    }
    source.onerror = () => {
      source?.close();
      source = null;
      if (!closed) setTimeout(connect, delay);
    };
  };

  const handle = (event: MessageEvent) => {
    const entry = JSON.parse(event.data) as JournalEntry;
    if (tracker.accept(entry.seq)) onEntry(entry);
  };

  connect();
  return {
    close() {
      closed = true;
      source?.close();
    },
  };
}
