import { describe, expect, it } from "vitest";

import { FitGate, pollUntilDone } from "../src/poll.js";
import type { FitStatus } from "../src/types.js";

const running: FitStatus = { status: "running", error: null, fit_id: null, flags: null };
const done: FitStatus = { status: "idle", error: null, fit_id: 3, flags: {} };
const failed: FitStatus = { status: "failed", error: "boom", fit_id: null, flags: null };

describe("pollUntilDone", () => {
  it("polls until the fit completes", async () => {
    const answers = [running, running, done];
    let calls = 0;
    const final = await pollUntilDone({
      fetchStatus: async () => {
        calls++;
        return answers.shift() ?? done;
      },
      intervalMs: 1,
    });
    expect(final.fit_id).toBe(3);
    expect(calls).toBe(3);
  });

  it("returns a failed status for the caller to surface", async () => {
    const final = await pollUntilDone({
      fetchStatus: async () => failed,
      intervalMs: 1,
    });
    expect(final.status).toBe("failed");
    expect(final.error).toBe("boom");
  });

  it("gives up after maxTicks", async () => {
    await expect(
      pollUntilDone({ fetchStatus: async () => running, intervalMs: 1, maxTicks: 3 }),
    ).rejects.toThrow("fit did not finish");
  });
});

describe("FitGate", () => {
  it("runs a single job and reports busy while running", async () => {
    const gate = new FitGate();
    let resolve!: () => void;
    const blocker = new Promise<void>((r) => (resolve = r));
    const first = gate.run(async () => {
      await blocker;
      return "done";
    });
    expect(gate.busy).toBe(true);
    // a second click while fitting is a no-op
    const second = await gate.run(async () => "should not run");
    expect(second).toBeNull();
    resolve();
    expect(await first).toBe("done");
    expect(gate.busy).toBe(false);
  });

  it("releases the gate after a failure", async () => {
    const gate = new FitGate();
    await expect(
      gate.run(async () => {
        throw new Error("nope");
      }),
    ).rejects.toThrow("nope");
    expect(gate.busy).toBe(false);
    expect(await gate.run(async () => 42)).toBe(42);
  });
});
