// Fit-status poller: polls every second while a fit runs, resolves with
// the final status. Only one poll loop exists at a time.

import type { FitStatus } from "./types.js";

export interface PollerDeps {
  fetchStatus: () => Promise<FitStatus>;
  intervalMs?: number;
  maxTicks?: number;
}

export async function pollUntilDone(deps: PollerDeps): Promise<FitStatus> {
  const interval = deps.intervalMs ?? 1000;
  const maxTicks = deps.maxTicks ?? 600;
  for (let tick = 0; tick < maxTicks; tick++) {
    const status = await deps.fetchStatus();
    if (status.status !== "running") return status;
    await new Promise((resolve) => setTimeout(resolve, interval));
  }
  throw new Error("fit did not finish");
}

/** Guards against overlapping fits: run() is a no-op while one is active. */
export class FitGate {
  private active = false;

  get busy(): boolean {
    return this.active;
  }

  async run<T>(job: () => Promise<T>): Promise<T | null> {
    if (this.active) return null;
    this.active = true;
    try {
      return await job();
    } finally {
      this.active = false;
    }
  }
}
