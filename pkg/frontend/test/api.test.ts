import { describe, expect, it } from "vitest";

import { RenderQueue } from "../src/api.js";

function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}

describe("render queue", () => {
  it("keeps at most one request in flight with latest-wins delivery", async () => {
    const delivered: number[] = [];
    const started: number[] = [];
    const queue = new RenderQueue<number>((v) => delivered.push(v));
    const job = (id: number) => async () => {
      started.push(id);
      await sleep(30);
      return id;
    };
    queue.submit(job(1));
    await sleep(5); // 1 is in flight
    queue.submit(job(2));
    queue.submit(job(3)); // replaces 2 in the queue
    await sleep(120);
    expect(started).toEqual([1, 3]);
    // job 1's result is stale by the time it lands (3 was already queued)
    expect(delivered).toEqual([3]);
  });

  it("delivers a lone request", async () => {
    const delivered: string[] = [];
    const queue = new RenderQueue<string>((v) => delivered.push(v));
    queue.submit(async () => "only");
    await sleep(20);
    expect(delivered).toEqual(["only"]);
  });

  it("drops a stale result when a newer submission arrives mid-flight", async () => {
    const delivered: number[] = [];
    const queue = new RenderQueue<number>((v) => delivered.push(v));
    const slow = async () => {
      await sleep(40);
      return 1;
    };
    queue.submit(slow);
    await sleep(5);
    queue.submit(async () => 2); // queued while 1 is in flight
    await sleep(120);
    expect(delivered).toEqual([2]);
  });
});
