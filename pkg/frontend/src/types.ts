// View models mirroring the service's JSON payloads.  The worker-facing
// types deliberately contain only what the assignment offer exposes.

export interface Character {
  id: string;
  name: string;
  description: string;
  image_ref: string;
  created_at: string;
  deleted: boolean;
}

export interface Team {
  id: string;
  name: string;
  member_ids: string[];
}

export interface Selection {
  document_id: string;
  start: number;
  end: number;
  snapshot: string;
  revision_at_capture: number;
}

export interface Reply {
  author_label: string;
  body: string;
  at: string;
}

export interface CommentThread {
  id: string;
  document_id: string;
  anchor: Selection;
  overview: string;
  created_at: string;
  orphaned: boolean;
  replies: Reply[];
}

export interface DocumentView {
  id: string;
  title: string;
  body: string;
  revision: number;
  threads: CommentThread[];
}

export interface TaskView {
  id: string;
  document_id: string;
  prompt: Selection;
  team_id: string;
  note: string;
  strategy: string;
  per_character_quota: number;
  reward_cents: number;
  thread_id: string;
  created_at: string;
  state: string;
  slot_ids: string[];
}

export interface Submission {
  id: string;
  slot_id: string;
  worker_id: string;
  body: string;
  submitted_at: string;
  elapsed_read_seconds: number;
  distance_scores: Record<string, number>;
}

export interface LatencyReport {
  first_idea_seconds: number;
  last_idea_seconds: number;
  per_character_coverage_seconds: number | null;
}

export interface TaskStatus {
  task: TaskView;
  state: string;
  slots: Record<string, number>;
  ideas_by_role: Record<string, Submission[]>;
  reward_cents: number;
  thread_created_at: string;
  latency: LatencyReport | null;
}

export interface RankedIdea extends Submission {
  distance: number | null;
  unscored: boolean;
  duplicate: boolean;
}

export interface IdeasResponse {
  task_id: string;
  metric: string | null;
  ideas: RankedIdea[];
}

export interface AssignmentOffer {
  slot_id: string;
  task_id: string;
  prompt: string;
  role_name: string | null;
  role_description: string | null;
  note: string;
  reward_cents: number;
  time_lock_seconds: number;
  min_idea_words: number;
  read_bottom_required: boolean;
}

export interface SubmitOutcome {
  accepted: boolean;
  reason?: string;
  message?: string;
  retry_after_seconds?: number | null;
  submission?: Submission;
}
