// Thin typed client over fetch.  Every console and worker-page action maps
// 1:1 onto one of these calls; nothing else talks to the network.

import type {
  AssignmentOffer,
  Character,
  DocumentView,
  IdeasResponse,
  SubmitOutcome,
  TaskStatus,
  TaskView,
  Team,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = "HTTP_ERROR";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    if (body.error) code = body.error;
    if (body.message) message = body.message;
    else if (body.detail) message = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, code, message);
}

interface Auth {
  writerKey?: string;
  workerToken?: string;
}

export class StorycrowdApi {
  constructor(
    private baseUrl: string,
    private auth: Auth,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private headers(idempotencyKey?: string): Record<string, string> {
    const h: Record<string, string> = { "Content-Type": "application/json" };
    if (this.auth.writerKey) h["X-Writer-Key"] = this.auth.writerKey;
    if (this.auth.workerToken) h["X-Worker-Token"] = this.auth.workerToken;
    if (idempotencyKey) h["X-Idempotency-Key"] = idempotencyKey;
    return h;
  }

  private request<T>(
    method: string,
    path: string,
    body?: unknown,
    idempotencyKey?: string,
  ): Promise<T> {
    return this.fetchImpl(this.baseUrl + path, {
      method,
      headers: this.headers(idempotencyKey),
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((resp) => unwrap<T>(resp));
  }

  // --- writer: characters and teams ---

  createCharacter(c: {
    name: string;
    description?: string;
    image_ref?: string;
  }): Promise<Character> {
    return this.request("POST", "/characters", c);
  }

  listCharacters(): Promise<Character[]> {
    return this.request("GET", "/characters");
  }

  updateCharacter(id: string, patch: Partial<Character>): Promise<Character> {
    return this.request("PATCH", `/characters/${id}`, patch);
  }

  deleteCharacter(id: string): Promise<void> {
    return this.request("DELETE", `/characters/${id}`);
  }

  createTeam(t: { name: string; member_ids: string[] }): Promise<Team> {
    return this.request("POST", "/teams", t);
  }

  listTeams(): Promise<Team[]> {
    return this.request("GET", "/teams");
  }

  updateTeam(id: string, patch: Partial<Team>): Promise<Team> {
    return this.request("PATCH", `/teams/${id}`, patch);
  }

  // --- writer: documents and tasks ---

  createDocument(d: { title: string; body?: string }): Promise<DocumentView> {
    return this.request("POST", "/documents", d);
  }

  getDocument(id: string): Promise<DocumentView> {
    return this.request("GET", `/documents/${id}`);
  }

  editDocument(
    id: string,
    edit: { at: number; delete_len: number; insert: string },
  ): Promise<DocumentView> {
    return this.request("PATCH", `/documents/${id}`, edit);
  }

  createTask(
    documentId: string,
    t: {
      start: number;
      end: number;
      team_id: string;
      note?: string;
      strategy?: string;
      per_character_quota?: number;
    },
  ): Promise<TaskView> {
    return this.request("POST", `/documents/${documentId}/tasks`, t);
  }

  listTasks(): Promise<TaskView[]> {
    return this.request("GET", "/tasks");
  }

  getTask(id: string): Promise<TaskStatus> {
    return this.request("GET", `/tasks/${id}`);
  }

  getIdeas(taskId: string, rank?: string): Promise<IdeasResponse> {
    const query = rank ? `?rank=${encodeURIComponent(rank)}` : "";
    return this.request("GET", `/tasks/${taskId}/ideas${query}`);
  }

  cancelTask(id: string): Promise<TaskView> {
    return this.request("POST", `/tasks/${id}/cancel`);
  }

  // --- worker protocol: the only three calls the worker page makes ---

  claim(): Promise<AssignmentOffer> {
    return this.request("POST", "/work/claim");
  }

  readBottom(slotId: string): Promise<void> {
    return this.request("POST", `/work/${slotId}/read-bottom`);
  }

  submit(
    slotId: string,
    body: string,
    idempotencyKey: string,
  ): Promise<SubmitOutcome> {
    return this.request("POST", `/work/${slotId}/submit`, { body }, idempotencyKey);
  }
}
