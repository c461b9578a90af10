import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, parseSse } from "../src/api.js";
import type { JournalEntry } from "../src/types.js";
import hintFullFixture from "./fixtures/session_hint_full.json";

const hintFull = hintFullFixture as JournalEntry[];

function fakeFetch(
  handler: (input: string, init?: RequestInit) => { status?: number; body?: unknown },
) {
  const calls: Array<{ input: string; init?: RequestInit }> = [];
  const impl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push({ input, init });
    const { status = 200, body = {} } = handler(input, init);
    const text = typeof body === "string" ? body : JSON.stringify(body);
    return new Response(text, { status });
  };
  return { impl, calls };
}

describe("ApiClient", () => {
  it("posts hints to the session endpoint", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: { accepted: true, duplicate: false } }));
    const api = new ApiClient("", impl);
    const result = await api.submitHint("s1", "use a running total", "tok-1");
    expect(result.accepted).toBe(true);
    expect(calls[0].input).toBe("/sessions/s1/hint");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      text: "use a running total",
      token: "tok-1",
    });
  });

  it("raises ApiError with the server detail on conflict", async () => {
    const { impl } = fakeFetch(() => ({
      status: 409,
      body: { detail: "session is Running, not AwaitingHint" },
    }));
    const api = new ApiClient("", impl);
    await expect(api.submitHint("s1", "too early")).rejects.toThrowError(ApiError);
    await expect(api.submitHint("s1", "too early")).rejects.toThrowError(/AwaitingHint/);
  });

  it("fetches and parses the event history", async () => {
    const sse = hintFull
      .map(
        (entry) =>
          `id: ${entry.seq}\nevent: ${entry.kind}\ndata: ${JSON.stringify(entry)}\n`,
      )
      .join("\n");
    const { impl, calls } = fakeFetch(() => ({ body: sse }));
    const api = new ApiClient("", impl);
    const entries = await api.history("s1");
    expect(calls[0].input).toBe("/sessions/s1/events?from_seq=1");
    expect(entries.map((e) => e.seq)).toEqual(hintFull.map((e) => e.seq));
    expect(entries[0].kind).toBe("StatusChange");
  });
});

describe("parseSse", () => {
  it("extracts one entry per data line and ignores noise", () => {
    const body = [
      "id: 1",
      'event: PromptSent',
      'data: {"seq": 1, "session_id": "s", "kind": "PromptSent", "payload": {"text": "p"}}',
      "",
      ": keepalive comment",
      "",
      "id: 2",
      'event: StatusChange',
      'data: {"seq": 2, "session_id": "s", "kind": "StatusChange", "payload": {"status": "Solved"}}',
      "",
    ].join("\n");
    const entries = parseSse(body);
    expect(entries).toHaveLength(2);
    expect(entries[1].payload.status).toBe("Solved");
  });
});
