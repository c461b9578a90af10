/** Thin typed wrappers over the service endpoints. */

import type { JournalEntry, SessionSummary } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.text();
    if (!response.ok) {
      let detail = body;
      try {
        detail = JSON.parse(body).detail ?? body;
      } catch {
        /* plain-text error body */
      }
      throw new ApiError(response.status, detail);
    }
    return body ? JSON.parse(body) : null;
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/sessions");
  }

  snapshot(sessionId: string): Promise<Record<string, any>> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  startSession(body: Record<string, any>): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitHint(sessionId: string, text: string, token?: string): Promise<{ accepted: boolean }> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/hint`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text, token }),
    });
  }

  abort(sessionId: string, token?: string): Promise<{ status: string }> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/abort`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token }),
    });
  }

  advance(sessionId: string, token?: string): Promise<{ accepted: boolean }> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/advance`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token }),
    });
  }

  /** One-shot fetch of the full event history (used on page load). */
  async history(sessionId: string): Promise<JournalEntry[]> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/events?from_seq=1`,
    );
    if (!response.ok) throw new ApiError(response.status, await response.text());
    return parseSse(await response.text());
  }
}

/** Parse a complete SSE body into journal entries. */
export function parseSse(body: string): JournalEntry[] {
  const entries: JournalEntry[] = [];
  for (const block of body.split("\n\n")) {
    for (const line of block.split("\n")) {
      if (line.startsWith("data: ")) {
        entries.push(JSON.parse(line.slice("data: ".length)));
      }
    }
  }
  return entries;
}
