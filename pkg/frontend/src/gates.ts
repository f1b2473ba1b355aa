// Client-side submission gates for the worker page.  The server re-checks
// everything; this machine only decides when the submit button lights up.
//
// Three gates must all pass, in any order of arrival:
//   countdown  - time_lock_seconds elapsed since the offer
//   scrolled   - story pane seen to its bottom (fires the attestation once)
//   words      - live word counter at or above the minimum
// Paste into the idea pane is inert and only bumps a counter for the notice.

// mirrors the server's counter: runs of space/tab/newline only
const WORD_SPLIT = /[ \t\n\r]+/;

export function countWords(text: string): number {
  const trimmed = text.replace(/^[ \t\n\r]+|[ \t\n\r]+$/g, "");
  if (trimmed === "") return 0;
  return trimmed.split(WORD_SPLIT).length;
}

export interface GateSnapshot {
  remainingSeconds: number;
  scrolledToBottom: boolean;
  wordCount: number;
  minWords: number;
  pasteAttempts: number;
  canSubmit: boolean;
}

export class SubmitGate {
  private startedAt: number;
  private lockSeconds: number;
  private minWords: number;
  private scrolled = false;
  private words = 0;
  private pastes = 0;
  private attested = false;
  private onAttest: () => void;

  constructor(options: {
    timeLockSeconds: number;
    minWords: number;
    now: number; // ms clock, e.g. Date.now()
    onAttest: () => void; // fired exactly once, on first scroll-to-bottom
  }) {
    this.startedAt = options.now;
    this.lockSeconds = options.timeLockSeconds;
    this.minWords = options.minWords;
    this.onAttest = options.onAttest;
  }

  remainingSeconds(now: number): number {
    const elapsed = (now - this.startedAt) / 1000;
    return Math.max(0, this.lockSeconds - elapsed);
  }

  /** Story pane scrolled to (or already showing) its bottom. */
  scrolledBottom(): void {
    this.scrolled = true;
    if (!this.attested) {
      this.attested = true;
      this.onAttest();
    }
  }

  ideaChanged(text: string): void {
    this.words = countWords(text);
  }

  /** A paste was attempted; the input must not change. */
  pasteBlocked(): void {
    this.pastes += 1;
  }

  /**
   * The server rejected with TIME_LOCK (clock skew): push the deadline out
   * by the server-reported remainder so the countdown restarts honestly.
   */
  applyServerRetry(retryAfterSeconds: number, now: number): void {
    this.startedAt = now;
    this.lockSeconds = retryAfterSeconds;
  }

  canSubmit(now: number): boolean {
    return (
      this.remainingSeconds(now) <= 0 &&
      this.scrolled &&
      this.words >= this.minWords
    );
  }

  snapshot(now: number): GateSnapshot {
    return {
      remainingSeconds: this.remainingSeconds(now),
      scrolledToBottom: this.scrolled,
      wordCount: this.words,
      minWords: this.minWords,
      pasteAttempts: this.pastes,
      canSubmit: this.canSubmit(now),
    };
  }
}
