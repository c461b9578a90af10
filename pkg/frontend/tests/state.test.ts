import { describe, expect, it } from "vitest";

import { applyEntry, buildView, emptyView, latestPair } from "../src/state.js";
import type { JournalEntry } from "../src/types.js";
import regressionFixture from "./fixtures/session_regression.json";
import awaitingHintFixture from "./fixtures/session_awaiting_hint.json";
import hintFullFixture from "./fixtures/session_hint_full.json";

const regression = regressionFixture as JournalEntry[];
const awaitingHint = awaitingHintFixture as JournalEntry[];
const hintFull = hintFullFixture as JournalEntry[];

describe("matrix", () => {
  it("shows the pass-to-fail transition highlighted", () => {
    const view = buildView(regression);
    expect(view.testIds).toEqual(["test_pair_sum", "test_zeros"]);
    expect(view.runs).toHaveLength(3);
    // run 1: the first test passes
    expect(view.runs[0]["test_pair_sum"]).toEqual({ status: "pass", regression: false });
    // run 2: same test now fails -> regression cell
    expect(view.runs[1]["test_pair_sum"]).toEqual({ status: "fail", regression: true });
    expect(view.runs[1]["test_zeros"]).toEqual({ status: "pass", regression: false });
    // run 3: fixed again, no highlight on a pass
    expect(view.runs[2]["test_pair_sum"]).toEqual({ status: "pass", regression: false });
  });

  it("leaves unpresented tests blank in earlier runs", () => {
    const view = buildView(regression);
    expect(view.runs[0]["test_zeros"]).toEqual({ status: null, regression: false });
  });

  it("records the regression outcome on the timeline", () => {
    const view = buildView(regression);
    const outcomes = view.timeline.map((row) => row.outcome);
    expect(outcomes).toContain("RegressionFails");
    const regressionRow = view.timeline.find((row) => row.outcome === "RegressionFails")!;
    expect(regressionRow.failingPrevIds).toEqual(["test_pair_sum"]);
  });
});

describe("refresh determinism", () => {
  it("rebuilding from scratch equals incremental application", () => {
    let incremental = emptyView();
    for (const entry of regression) incremental = applyEntry(incremental, entry);
    expect(buildView(regression)).toEqual(incremental);
  });

  it("any split between history and live tail produces the same view", () => {
    const full = buildView(regression);
    for (let cut = 0; cut <= regression.length; cut++) {
      let view = buildView(regression.slice(0, cut));
      for (const entry of regression.slice(cut)) view = applyEntry(view, entry);
      expect(view).toEqual(full);
    }
  });

  it("does not mutate the previous view", () => {
    const before = buildView(regression.slice(0, 5));
    const frozen = JSON.parse(JSON.stringify(before));
    applyEntry(before, regression[5]);
    expect(before).toEqual(frozen);
  });
});

describe("awaiting-hint state", () => {
  it("enables the hint box exactly while the server awaits a hint", () => {
    const paused = buildView(awaitingHint);
    expect(paused.status).toBe("AwaitingHint");
    expect(paused.awaitingHint).toBe(true);
    const finished = buildView(hintFull);
    expect(finished.awaitingHint).toBe(false);
    expect(finished.status).toBe("Solved");
  });

  it("applies the hint round-trip entry to the timeline", () => {
    let view = buildView(awaitingHint);
    const tail = hintFull.slice(awaitingHint.length);
    expect(tail[0].kind).toBe("HintProvided");
    for (const entry of tail) view = applyEntry(view, entry);
    const hintRow = view.timeline.find((row) => row.hintText);
    expect(hintRow?.hintText).toBe("add the two arguments");
    const hintPrompt = view.transcript.find((t) => t.promptKind === "ImplementationHint");
    expect(hintPrompt?.text).toContain("Hint: add the two arguments.");
    expect(view.status).toBe("Solved");
  });
});

describe("transcript and revisions", () => {
  it("keeps prompt and response text verbatim", () => {
    const view = buildView(regression);
    const prompts = regression.filter((e) => e.kind === "PromptSent");
    const userTurns = view.transcript.filter((t) => t.role === "user");
    expect(userTurns.map((t) => t.text)).toEqual(prompts.map((e) => e.payload.text));
    const responses = regression.filter((e) => e.kind === "ResponseReceived");
    const assistantTurns = view.transcript.filter((t) => t.role === "assistant");
    expect(assistantTurns.map((t) => t.text)).toEqual(responses.map((e) => e.payload.text));
  });

  it("exposes the last two revisions for the diff pane", () => {
    const view = buildView(regression);
    const [before, after] = latestPair(view);
    expect(before).toContain("return x * y");
    expect(after).toContain("return x + y");
  });

  it("tracks prompt count and final status", () => {
    const view = buildView(regression);
    expect(view.promptsSent).toBe(regression.filter((e) => e.kind === "PromptSent").length);
    expect(view.status).toBe("Solved");
    expect(view.oracleOutcome).toBe("oracle_absent");
  });
});
