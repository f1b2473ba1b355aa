// Small repeating poller used by the writer console to refresh threads
// without a full-page reload.  Overlapping ticks are skipped rather than
// queued, and errors go to the handler instead of killing the loop.

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;

  constructor(
    private task: () => Promise<void>,
    private intervalMs = 2000,
    private onError: (err: unknown) => void = () => {},
  ) {}

  start(): void {
    if (this.timer !== null) return;
    this.tick();
    this.timer = setInterval(() => this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private tick(): void {
    if (this.inFlight) return;
    this.inFlight = true;
    this.task()
      .catch((err) => this.onError(err))
      .finally(() => {
        this.inFlight = false;
      });
  }
}
