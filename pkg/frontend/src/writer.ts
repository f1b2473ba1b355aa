// Writer console: character gallery, team editor, document editor with
// select-to-launch task dialog, and the thread sidebar where ideas arrive.

import { ApiError, StorycrowdApi } from "./api.js";
import { Poller } from "./poll.js";
import type { Character, CommentThread, DocumentView, Team } from "./types.js";

const RANK_METRICS = ["wordsum", "sent_mean", "sent_min", "sent_median", "sidecar"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function showError(err: unknown): void {
  const bar = document.getElementById("error-bar");
  if (!bar) return;
  bar.textContent =
    err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  bar.classList.remove("hidden");
  setTimeout(() => bar.classList.add("hidden"), 6000);
}

export class WriterConsole {
  private api: StorycrowdApi;
  private characters: Character[] = [];
  private teams: Team[] = [];
  private doc: DocumentView | null = null;
  private rankMetric: string | null = null;
  private poller: Poller;

  constructor(baseUrl: string, writerKey: string) {
    this.api = new StorycrowdApi(baseUrl, { writerKey });
    this.poller = new Poller(() => this.refreshThreads(), 2000, showError);
  }

  async start(): Promise<void> {
    await this.reloadCharacters();
    await this.reloadTeams();
    this.wireForms();
    this.poller.start();
  }

  private wireForms(): void {
    const charForm = document.getElementById("character-form") as HTMLFormElement;
    charForm.addEventListener("submit", (e) => {
      e.preventDefault();
      const data = new FormData(charForm);
      this.api
        .createCharacter({
          name: String(data.get("name") ?? ""),
          description: String(data.get("description") ?? ""),
          image_ref: String(data.get("image_ref") ?? ""),
        })
        .then(() => {
          charForm.reset();
          return this.reloadCharacters();
        })
        .catch(showError);
    });

    const teamForm = document.getElementById("team-form") as HTMLFormElement;
    teamForm.addEventListener("submit", (e) => {
      e.preventDefault();
      const data = new FormData(teamForm);
      const memberIds = this.characters
        .filter((c) => data.get(`member-${c.id}`))
        .map((c) => c.id);
      this.api
        .createTeam({ name: String(data.get("name") ?? ""), member_ids: memberIds })
        .then(() => {
          teamForm.reset();
          this.renderMemberPicker();
          return this.reloadTeams();
        })
        .catch(showError);
    });

    const docForm = document.getElementById("document-form") as HTMLFormElement;
    docForm.addEventListener("submit", (e) => {
      e.preventDefault();
      const data = new FormData(docForm);
      this.api
        .createDocument({
          title: String(data.get("title") ?? ""),
          body: String(data.get("body") ?? ""),
        })
        .then((doc) => this.openDocument(doc))
        .catch(showError);
    });

    const editor = document.getElementById("editor") as HTMLTextAreaElement;
    editor.addEventListener("mouseup", () => this.maybeOpenTaskDialog(editor));
    editor.addEventListener("keyup", () => this.maybeOpenTaskDialog(editor));

    const taskForm = document.getElementById("task-form") as HTMLFormElement;
    taskForm.addEventListener("submit", (e) => {
      e.preventDefault();
      this.launchTask(new FormData(taskForm)).catch(showError);
    });

    const rankSelect = document.getElementById("rank-select") as HTMLSelectElement;
    for (const metric of RANK_METRICS) {
      const opt = el("option", undefined, metric);
      opt.value = metric;
      rankSelect.append(opt);
    }
    rankSelect.addEventListener("change", () => {
      this.rankMetric = rankSelect.value || null;
      this.refreshThreads().catch(showError);
    });
  }

  private async reloadCharacters(): Promise<void> {
    this.characters = await this.api.listCharacters();
    const gallery = document.getElementById("character-gallery")!;
    gallery.replaceChildren();
    for (const c of this.characters) {
      const card = el("div", "character-card");
      card.append(el("h3", undefined, c.name));
      card.append(el("p", undefined, c.description));
      const remove = el("button", undefined, "Delete");
      remove.addEventListener("click", () => this.deleteCharacter(c));
      card.append(remove);
      gallery.append(card);
    }
    this.renderMemberPicker();
  }

  private deleteCharacter(c: Character): void {
    const affected = this.teams.filter((t) => t.member_ids.includes(c.id));
    if (affected.length > 0) {
      const names = affected.map((t) => t.name).join(", ");
      if (!confirm(`"${c.name}" is on: ${names}. Delete anyway?`)) return;
    }
    this.api
      .deleteCharacter(c.id)
      .then(() => this.reloadCharacters())
      .catch(showError);
  }

  private renderMemberPicker(): void {
    const picker = document.getElementById("member-picker")!;
    picker.replaceChildren();
    for (const c of this.characters) {
      const label = el("label", "member-choice");
      const box = el("input");
      box.type = "checkbox";
      box.name = `member-${c.id}`;
      // selected members get the highlighted style
      box.addEventListener("change", () =>
        label.classList.toggle("selected", box.checked),
      );
      label.append(box, document.createTextNode(c.name));
      picker.append(label);
    }
  }

  private async reloadTeams(): Promise<void> {
    this.teams = await this.api.listTeams();
    const list = document.getElementById("team-list")!;
    list.replaceChildren();
    const taskTeam = document.getElementById("task-team") as HTMLSelectElement;
    taskTeam.replaceChildren();
    for (const t of this.teams) {
      const members = t.member_ids
        .map((id) => this.characters.find((c) => c.id === id)?.name ?? id)
        .join(", ");
      list.append(el("li", "team-row", `${t.name} - ${members}`));
      const opt = el("option", undefined, t.name);
      opt.value = t.id;
      taskTeam.append(opt);
    }
  }

  private openDocument(doc: DocumentView): void {
    this.doc = doc;
    (document.getElementById("editor") as HTMLTextAreaElement).value = doc.body;
    document.getElementById("doc-title")!.textContent = doc.title;
    this.renderThreads(doc.threads);
  }

  private maybeOpenTaskDialog(editor: HTMLTextAreaElement): void {
    if (!this.doc) return;
    const start = editor.selectionStart;
    const end = editor.selectionEnd;
    const dialog = document.getElementById("task-dialog")!;
    if (end - start < 1) {
      dialog.classList.add("hidden");
      return;
    }
    dialog.classList.remove("hidden");
    // Content is prefilled from the selection, exactly as selected
    (document.getElementById("task-content") as HTMLTextAreaElement).value =
      editor.value.slice(start, end);
    dialog.dataset.start = String(start);
    dialog.dataset.end = String(end);
  }

  private async launchTask(data: FormData): Promise<void> {
    if (!this.doc) return;
    const dialog = document.getElementById("task-dialog")!;
    await this.api.createTask(this.doc.id, {
      start: Number(dialog.dataset.start),
      end: Number(dialog.dataset.end),
      team_id: String(data.get("team_id") ?? ""),
      note: String(data.get("note") ?? ""),
      strategy: String(data.get("strategy") ?? "ROLE_PLAY"),
      per_character_quota: Number(data.get("quota") ?? 3),
    });
    dialog.classList.add("hidden");
    await this.refreshThreads();
  }

  private async refreshThreads(): Promise<void> {
    if (!this.doc) return;
    const doc = await this.api.getDocument(this.doc.id);
    this.doc = doc;
    await this.renderThreads(doc.threads);
  }

  private async renderThreads(threads: CommentThread[]): Promise<void> {
    const sidebar = document.getElementById("thread-sidebar")!;
    const tasks = await this.api.listTasks();
    sidebar.replaceChildren();
    for (const thread of threads) {
      const box = el("div", "thread");
      box.append(el("p", "overview", thread.overview));
      if (thread.orphaned) box.append(el("p", "orphaned", "anchor orphaned"));
      const task = tasks.find((t) => t.thread_id === thread.id);
      const list = el("ul", "replies");
      if (task && this.rankMetric) {
        // ranked view: farthest idea first, duplicate flags inline
        const ranked = await this.api.getIdeas(task.id, this.rankMetric);
        for (const idea of ranked.ideas) {
          const item = el("li", "reply", idea.body);
          if (idea.duplicate) item.append(el("span", "dup-flag", " [near-duplicate]"));
          if (!idea.unscored && idea.distance !== null) {
            item.append(el("span", "distance", ` d=${idea.distance.toFixed(3)}`));
          }
          list.append(item);
        }
      } else {
        for (const reply of thread.replies) {
          list.append(el("li", "reply", `${reply.author_label}: ${reply.body}`));
        }
      }
      box.append(list);
      sidebar.append(box);
    }
  }
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const key = params.get("key") ?? sessionStorage.getItem("writer-key") ?? "";
  sessionStorage.setItem("writer-key", key);
  new WriterConsole(params.get("server") ?? "", key).start().catch(showError);
}
