/**
 * Latest-only request scheduler for a single endpoint.
 *
 * Guarantees:
 *  - at most one request is in flight at any time;
 *  - issuing while one is in flight queues the new payload, replacing any
 *    previously queued payload (intermediate payloads are never sent);
 *  - a response is delivered only if no newer payload was issued after it,
 *    so superseded responses are dropped, not applied out of order.
 */

export interface LatestOnlyHooks<TArgs, TResult> {
  send: (args: TArgs) => Promise<TResult>;
  deliver: (result: TResult, args: TArgs) => void;
  /** Called for failures of the newest request only; superseded failures are dropped. */
  onError: (error: unknown, args: TArgs) => void;
  /** Called when a response or failure arrived but was superseded and dropped. */
  onDrop?: (args: TArgs) => void;
}

export class LatestOnly<TArgs, TResult> {
  private newestSeq = 0;
  private inFlight = false;
  private queued: { args: TArgs; seq: number } | null = null;

  constructor(private readonly hooks: LatestOnlyHooks<TArgs, TResult>) {}

  issue(args: TArgs): void {
    const seq = ++this.newestSeq;
    if (this.inFlight) {
      this.queued = { args, seq };
      return;
    }
    void this.fire(args, seq);
  }

  busy(): boolean {
    return this.inFlight;
  }

  private async fire(args: TArgs, seq: number): Promise<void> {
    this.inFlight = true;
    try {
      const result = await this.hooks.send(args);
      if (seq === this.newestSeq) {
        this.hooks.deliver(result, args);
      } else {
        this.hooks.onDrop?.(args);
      }
    } catch (error) {
      if (seq === this.newestSeq) {
        this.hooks.onError(error, args);
      } else {
        this.hooks.onDrop?.(args);
      }
    } finally {
      this.inFlight = false;
      if (this.queued !== null) {
        const next = this.queued;
        this.queued = null;
        void this.fire(next.args, next.seq);
      }
    }
  }
}
