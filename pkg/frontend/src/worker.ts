// Worker task page: three panes (instructions, story, idea entry) with the
// client-side submission gates.  The page only ever calls claim,
// read-bottom, and submit.

import { ApiError, StorycrowdApi } from "./api.js";
import { SubmitGate } from "./gates.js";
import type { AssignmentOffer } from "./types.js";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

export class WorkerPage {
  private api: StorycrowdApi;
  private gate: SubmitGate | null = null;
  private offer: AssignmentOffer | null = null;
  private attempt = 0;
  private ticker: ReturnType<typeof setInterval> | null = null;

  constructor(baseUrl: string, workerToken: string) {
    this.api = new StorycrowdApi(baseUrl, { workerToken });
  }

  async start(): Promise<void> {
    try {
      this.offer = await this.api.claim();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        byId("status").textContent = "No assignments available right now.";
        return;
      }
      throw err;
    }
    this.render(this.offer);
    this.wireGates(this.offer);
  }

  private render(offer: AssignmentOffer): void {
    const role = offer.role_name ?? "anyone";
    // the role name is shown highlighted in every pane
    for (const id of ["role-instruction", "role-story", "role-idea"]) {
      const span = byId(id);
      span.textContent = role;
      span.classList.add("role-highlight");
    }
    byId("role-description").textContent = offer.role_description ?? "";
    byId("task-note").textContent = offer.note;
    byId("story-text").textContent = offer.prompt;
    byId("reward").textContent = `${(offer.reward_cents / 100).toFixed(2)} USD`;
    byId("min-words").textContent = String(offer.min_idea_words);
  }

  private wireGates(offer: AssignmentOffer): void {
    const gate = new SubmitGate({
      timeLockSeconds: offer.time_lock_seconds,
      minWords: offer.min_idea_words,
      now: Date.now(),
      onAttest: () => {
        this.api.readBottom(offer.slot_id).catch(() => {
          // the server rejects the final submit if this never landed
        });
      },
    });
    this.gate = gate;

    const story = byId("story-pane");
    const checkScroll = () => {
      if (story.scrollTop + story.clientHeight >= story.scrollHeight - 1) {
        gate.scrolledBottom();
      }
    };
    story.addEventListener("scroll", checkScroll);
    checkScroll(); // short prompt: bottom already visible on load

    const idea = byId("idea-input") as HTMLTextAreaElement;
    idea.addEventListener("input", () => gate.ideaChanged(idea.value));
    idea.addEventListener("paste", (e) => {
      e.preventDefault(); // input stays unchanged
      gate.pasteBlocked();
      byId("paste-notice").classList.remove("hidden");
    });

    byId("submit-btn").addEventListener("click", () => {
      this.submit(idea.value).catch((err) => {
        byId("status").textContent =
          err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      });
    });

    this.ticker = setInterval(() => this.repaint(), 250);
    this.repaint();
  }

  private repaint(): void {
    if (!this.gate) return;
    const snap = this.gate.snapshot(Date.now());
    byId("countdown").textContent =
      snap.remainingSeconds > 0 ? `${Math.ceil(snap.remainingSeconds)}s` : "ready";
    byId("word-counter").textContent = `${snap.wordCount}/${snap.minWords}`;
    (byId("submit-btn") as HTMLButtonElement).disabled = !snap.canSubmit;
  }

  private async submit(body: string): Promise<void> {
    if (!this.offer || !this.gate) return;
    this.attempt += 1;
    const key = `${this.offer.slot_id}-${this.attempt}`;
    const outcome = await this.api.submit(this.offer.slot_id, body, key);
    if (outcome.accepted) {
      if (this.ticker) clearInterval(this.ticker);
      byId("status").textContent = "Idea accepted. Thank you!";
      (byId("submit-btn") as HTMLButtonElement).disabled = true;
      return;
    }
    byId("status").textContent = `Rejected (${outcome.reason}): ${outcome.message}`;
    if (outcome.reason === "TIME_LOCK" && outcome.retry_after_seconds) {
      // clock skew: trust the server's remaining time and re-lock
      this.gate.applyServerRetry(outcome.retry_after_seconds, Date.now());
      this.repaint();
    }
  }
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const token =
    params.get("token") ?? `browser-${Math.random().toString(36).slice(2, 10)}`;
  new WorkerPage(params.get("server") ?? "", token).start().catch((err) => {
    const status = document.getElementById("status");
    if (status) status.textContent = String(err);
  });
}
