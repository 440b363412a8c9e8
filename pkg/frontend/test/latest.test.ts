import { describe, expect, it } from "vitest";

import { LatestOnly } from "../src/latest.js";

interface Deferred {
  resolve: (value: string) => void;
  reject: (error: unknown) => void;
}

function harness() {
  const sends: Array<{ args: number; deferred: Deferred }> = [];
  const delivered: Array<{ result: string; args: number }> = [];
  const errors: number[] = [];
  const dropped: number[] = [];
  const latest = new LatestOnly<number, string>({
    send: (args) =>
      new Promise<string>((resolve, reject) => {
        sends.push({ args, deferred: { resolve, reject } });
      }),
    deliver: (result, args) => delivered.push({ result, args }),
    onError: (_error, args) => errors.push(args),
    onDrop: (args) => dropped.push(args),
  });
  return { latest, sends, delivered, errors, dropped };
}

const tick = () => new Promise<void>((resolve) => setTimeout(resolve, 0));

describe("LatestOnly", () => {
  it("sends immediately when idle and delivers the response", async () => {
    const h = harness();
    h.latest.issue(1);
    expect(h.sends).toHaveLength(1);
    h.sends[0].deferred.resolve("one");
    await tick();
    expect(h.delivered).toEqual([{ result: "one", args: 1 }]);
  });

  it("never has two requests in flight", async () => {
    const h = harness();
    h.latest.issue(1);
    h.latest.issue(2);
    h.latest.issue(3);
    expect(h.sends).toHaveLength(1);
    h.sends[0].deferred.resolve("one");
    await tick();
    expect(h.sends).toHaveLength(2);
  });

  it("coalesces queued payloads so only the newest is sent", async () => {
    const h = harness();
    h.latest.issue(1);
    h.latest.issue(2);
    h.latest.issue(3);
    h.sends[0].deferred.resolve("one");
    await tick();
    expect(h.sends.map((s) => s.args)).toEqual([1, 3]);
    h.sends[1].deferred.resolve("three");
    await tick();
    expect(h.delivered.map((d) => d.args)).toEqual([3]);
  });

  it("drops a response that was superseded while in flight", async () => {
    const h = harness();
    h.latest.issue(1);
    h.latest.issue(2);
    h.sends[0].deferred.resolve("stale");
    await tick();
    h.sends[1].deferred.resolve("fresh");
    await tick();
    expect(h.delivered).toEqual([{ result: "fresh", args: 2 }]);
    expect(h.dropped).toEqual([1]);
  });

  it("drops failures of superseded requests and reports only the newest failure", async () => {
    const h = harness();
    h.latest.issue(1);
    h.latest.issue(2);
    h.sends[0].deferred.reject(new Error("old boom"));
    await tick();
    h.sends[1].deferred.reject(new Error("new boom"));
    await tick();
    expect(h.errors).toEqual([2]);
    expect(h.dropped).toEqual([1]);
  });

  it("recovers after a failure and keeps serving later issues", async () => {
    const h = harness();
    h.latest.issue(1);
    h.sends[0].deferred.reject(new Error("boom"));
    await tick();
    h.latest.issue(2);
    h.sends[1].deferred.resolve("two");
    await tick();
    expect(h.errors).toEqual([1]);
    expect(h.delivered).toEqual([{ result: "two", args: 2 }]);
  });

  it("reports busy only while a request is in flight", async () => {
    const h = harness();
    expect(h.latest.busy()).toBe(false);
    h.latest.issue(1);
    expect(h.latest.busy()).toBe(true);
    h.sends[0].deferred.resolve("one");
    await tick();
    expect(h.latest.busy()).toBe(false);
  });
});
