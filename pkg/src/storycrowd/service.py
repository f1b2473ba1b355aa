"""HTTP+JSON API over the workspace/orchestrator/distance modules.

Writer endpoints authenticate with the ``X-Writer-Key`` header; worker
endpoints with a self-chosen stable token in ``X-Worker-Token``.  Worker
mutations may carry ``X-Idempotency-Key``; a retried submit returns the
original outcome.  All timestamps in responses are ISO-8601 UTC.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import errors
from .config import Config
from .distance import load_embeddings, load_sidecar, near_duplicate_flags, rank_ideas
from .errors import ConfigError, StorycrowdError
from .orchestrator import NO_ROLE_LABEL, OrchestratorConfig
from .scoring import DistanceService
from .store import (
    Store,
    character_payload,
    document_payload,
    iso,
    latency_payload,
    submission_payload,
    task_payload,
    team_payload,
    thread_payload,
)

_STATUS = {
    errors.NotFound: 404,
    errors.NoIdeasYet: 404,
    errors.NoWorkAvailable: 404,
    errors.AlreadyActive: 409,
    errors.AlreadyWorkedTask: 409,
    errors.BadState: 409,
    errors.NotClaimant: 403,
}


def _http_status(exc: StorycrowdError) -> int:
    for cls, status in _STATUS.items():
        if isinstance(exc, cls):
            return status
    return 400


class CharacterIn(BaseModel):
    name: str
    description: str = ""
    image_ref: str | None = None


class CharacterPatch(BaseModel):
    name: str | None = None
    description: str | None = None
    image_ref: str | None = None


class TeamIn(BaseModel):
    name: str
    member_ids: list[str]


class TeamPatch(BaseModel):
    name: str | None = None
    member_ids: list[str] | None = None


class DocumentIn(BaseModel):
    title: str
    body: str = ""


class EditIn(BaseModel):
    at: int
    delete_len: int = 0
    insert: str = ""


class TaskIn(BaseModel):
    start: int
    end: int
    team_id: str
    note: str = ""
    strategy: str = "ROLE_PLAY"
    per_character_quota: int | None = Field(default=None, ge=1)


class ClaimIn(BaseModel):
    pass


class SubmitIn(BaseModel):
    body: str


def create_app(cfg: Config) -> FastAPI:
    try:
        embeddings = load_embeddings(cfg.embedding_path)
    except StorycrowdError as exc:
        raise ConfigError(f"cannot load embeddings: {exc}")
    sidecar = None
    if cfg.sidecar_path:
        try:
            sidecar = load_sidecar(cfg.sidecar_path)
        except StorycrowdError as exc:
            raise ConfigError(f"cannot load sidecar vectors: {exc}")
    distance_svc = DistanceService(embeddings, sidecar)
    orch_cfg = OrchestratorConfig(
        time_lock_seconds=cfg.time_lock_seconds,
        min_idea_words=cfg.min_idea_words,
        per_character_quota=cfg.per_character_quota,
        copy_overlap_tokens=cfg.copy_overlap_tokens,
    )
    store = Store(cfg.data_dir, orch_cfg, scorer=distance_svc.score_submission)

    app = FastAPI(title="storycrowd", version="0.1.0")
    app.state.store = store
    app.state.config = cfg
    app.state.distance = distance_svc

    @app.exception_handler(StorycrowdError)
    async def domain_error(request: Request, exc: StorycrowdError):
        return JSONResponse(status_code=_http_status(exc),
                            content={"error": exc.code, "message": exc.message})

    def writer(x_writer_key: str | None = Header(default=None)) -> None:
        if x_writer_key != cfg.writer_key:
            raise HTTPException(status_code=401,
                                detail={"error": "DENIED", "message": "writer key required"})

    def worker(x_worker_token: str | None = Header(default=None)) -> str:
        if not x_worker_token:
            raise HTTPException(status_code=401,
                                detail={"error": "DENIED", "message": "worker token required"})
        return x_worker_token

    # --- characters ---

    @app.post("/characters", status_code=201, dependencies=[Depends(writer)])
    def create_character(body: CharacterIn):
        return store.command("character.create", body.model_dump())

    @app.get("/characters", dependencies=[Depends(writer)])
    def list_characters():
        return [character_payload(c) for c in store.ws.list_characters()]

    @app.get("/characters/{char_id}", dependencies=[Depends(writer)])
    def get_character(char_id: str):
        return character_payload(store.ws.get_character(char_id))

    @app.patch("/characters/{char_id}", dependencies=[Depends(writer)])
    def update_character(char_id: str, body: CharacterPatch):
        args = {"id": char_id, **body.model_dump(exclude_none=True)}
        return store.command("character.update", args)

    @app.delete("/characters/{char_id}", dependencies=[Depends(writer)])
    def delete_character(char_id: str):
        return store.command("character.delete", {"id": char_id})

    # --- teams ---

    @app.post("/teams", status_code=201, dependencies=[Depends(writer)])
    def create_team(body: TeamIn):
        return store.command("team.create", body.model_dump())

    @app.get("/teams", dependencies=[Depends(writer)])
    def list_teams():
        return [team_payload(t) for t in store.ws.list_teams()]

    @app.patch("/teams/{team_id}", dependencies=[Depends(writer)])
    def update_team(team_id: str, body: TeamPatch):
        args = {"id": team_id, **body.model_dump(exclude_none=True)}
        return store.command("team.update", args)

    @app.delete("/teams/{team_id}", dependencies=[Depends(writer)])
    def delete_team(team_id: str):
        return store.command("team.delete", {"id": team_id})

    # --- documents ---

    @app.post("/documents", status_code=201, dependencies=[Depends(writer)])
    def create_document(body: DocumentIn):
        return store.command("document.create", body.model_dump())

    @app.get("/documents/{doc_id}", dependencies=[Depends(writer)])
    def get_document(doc_id: str):
        doc = store.ws.get_document(doc_id)
        return document_payload(doc, store.ws.list_threads(doc_id))

    @app.patch("/documents/{doc_id}", dependencies=[Depends(writer)])
    def edit_document(doc_id: str, body: EditIn):
        return store.command("document.edit", {"id": doc_id, **body.model_dump()})

    # --- tasks ---

    @app.post("/documents/{doc_id}/tasks", status_code=201,
              dependencies=[Depends(writer)])
    def create_task(doc_id: str, body: TaskIn):
        return store.command("task.create",
                             {"document_id": doc_id, **body.model_dump()})

    @app.get("/tasks", dependencies=[Depends(writer)])
    def list_tasks():
        with store.orch._lock:
            return [task_payload(t) for t in store.orch.tasks.values()]

    @app.get("/tasks/{task_id}", dependencies=[Depends(writer)])
    def task_status(task_id: str):
        status = store.orch.task_status(task_id)
        thread = store.ws.get_thread(status["task"].thread_id)
        return {
            "task": task_payload(status["task"]),
            "state": status["state"].value,
            "slots": status["slots"],
            "reward_cents": status["reward_cents"],
            "thread_created_at": iso(thread.created_at),
            "ideas_by_role": {
                label: [submission_payload(s) for s in subs]
                for label, subs in status["ideas_by_role"].items()},
            "latency": latency_payload(status["latency"]),
        }

    @app.get("/tasks/{task_id}/latency", dependencies=[Depends(writer)])
    def task_latency(task_id: str):
        return latency_payload(store.orch.latency_report(task_id))

    @app.post("/tasks/{task_id}/cancel", dependencies=[Depends(writer)])
    def cancel_task(task_id: str):
        return store.command("task.cancel", {"id": task_id})

    @app.get("/tasks/{task_id}/ideas", dependencies=[Depends(writer)])
    def task_ideas(task_id: str, rank: str | None = None):
        task = store.orch.get_task(task_id)
        subs = store.orch.task_submissions(task_id)
        by_id = {s.id: s for s in subs}
        items = [(s.id, s.body, s.submitted_at) for s in subs]
        payload = {"task_id": task_id, "metric": rank}
        if rank is None:
            payload["ideas"] = [
                {**submission_payload(s), "distance": None,
                 "unscored": False, "duplicate": False}
                for s in subs]
            return payload
        if rank not in distance_svc.metric_names():
            raise errors.NotFound(f"unknown metric {rank}")

        # rank on the scores computed at acceptance time; the metric gets
        # the submission id, missing scores surface as UNSCORED
        ranked = rank_ideas(
            task.prompt.snapshot,
            [(s.id, s.id, s.submitted_at) for s in subs],
            lambda _prompt, sid: by_id[sid].distance_scores[rank],
        )
        if rank == "sidecar":
            flags: set[str] = set()
        else:
            flags = near_duplicate_flags(
                items,
                lambda a, b: distance_svc.text_distance(rank, a, b),
                cfg.duplicate_distance_threshold)
        payload["ideas"] = [
            {**submission_payload(by_id[r.idea_id]),
             "distance": r.distance, "unscored": r.unscored,
             "duplicate": r.idea_id in flags}
            for r in ranked]
        return payload

    # --- worker API ---

    @app.post("/work/claim")
    def claim(worker_id: str = Depends(worker),
              x_idempotency_key: str | None = Header(default=None)):
        return store.command("work.claim", {"worker_id": worker_id},
                             idempotency_key=x_idempotency_key)

    @app.post("/work/{slot_id}/read-bottom")
    def read_bottom(slot_id: str, worker_id: str = Depends(worker),
                    x_idempotency_key: str | None = Header(default=None)):
        return store.command("work.attest",
                             {"slot_id": slot_id, "worker_id": worker_id},
                             idempotency_key=x_idempotency_key)

    @app.post("/work/{slot_id}/submit")
    def submit(slot_id: str, body: SubmitIn, worker_id: str = Depends(worker),
               x_idempotency_key: str | None = Header(default=None)):
        return store.command(
            "work.submit",
            {"slot_id": slot_id, "worker_id": worker_id, "body": body.body},
            idempotency_key=x_idempotency_key)

    # --- admin ---

    @app.post("/admin/snapshot", dependencies=[Depends(writer)])
    def snapshot():
        return {"snapshot": store.snapshot(), "seq": store.seq}

    return app


def serve(cfg: Config) -> None:
    """Boot the service: load config/embeddings, recover state, listen."""
    import uvicorn

    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
