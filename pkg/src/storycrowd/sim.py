"""Scripted-crowd client: drives the worker API end to end so full-system
tests and latency experiments run without humans.

Each simulated worker is a real concurrent HTTP client with its own RNG
stream derived from the profile seed, so a fixed seed fully determines
worker behavior (arrival order, read delays, compliance draws, idea
assignment) independent of thread scheduling.
"""

from __future__ import annotations

import csv
import math
import os
import random
import statistics
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime

import httpx

from .config import parse_kv_file
from .errors import ConfigError, CorpusTooSmall, ServerUnreachable
from .workspace import word_count


@dataclass
class SimProfile:
    n_workers: int = 10
    arrival: str = "UNIFORM(0.0, 1.0)"          # inter-worker start offsets, seconds
    read_time: str = "UNIFORM(0.1, 0.3)"
    idea_source: str = "corpus.txt"
    compliance: float = 1.0
    seed: int = 0
    writer_key: str = ""
    min_idea_words: int = 50
    histogram_bucket_seconds: float = 10.0
    claim_poll_seconds: float = 0.2

    @classmethod
    def from_file(cls, path: str) -> "SimProfile":
        raw = parse_kv_file(path)
        profile = cls()
        for key, value in raw.items():
            if not hasattr(profile, key):
                raise ConfigError(f"unknown profile key: {key}")
            current = getattr(profile, key)
            if isinstance(current, bool):
                setattr(profile, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(profile, key, int(value))
            elif isinstance(current, float):
                setattr(profile, key, float(value))
            else:
                setattr(profile, key, value)
        if not 0.0 <= profile.compliance <= 1.0:
            raise ConfigError("compliance must be in [0, 1]")
        return profile


def sample_distribution(spec: str, rng: random.Random) -> float:
    """Parse and draw from UNIFORM(a,b) or EXPONENTIAL(rate)."""
    spec = spec.strip()
    name, _, args = spec.partition("(")
    args = args.rstrip(")")
    name = name.strip().upper()
    if name == "UNIFORM":
        a, b = (float(x) for x in args.split(","))
        return rng.uniform(a, b)
    if name == "EXPONENTIAL":
        rate = float(args)
        return rng.expovariate(rate)
    raise ConfigError(f"unknown distribution {spec!r}")


@dataclass
class TaskLatencies:
    task_id: str
    idea_latencies: list[float]
    first_idea: float
    last_idea: float
    per_character_coverage: float | None


@dataclass
class SimResult:
    acceptances: int = 0
    rejections: dict[str, int] = field(default_factory=dict)
    task_latencies: list[TaskLatencies] = field(default_factory=list)
    server_latency_reports: dict[str, dict] = field(default_factory=dict)
    histogram_path: str = ""
    summary: dict[str, dict[str, float]] = field(default_factory=dict)


def _parse_iso(ts: str) -> float:
    return datetime.fromisoformat(ts).timestamp()


class _Worker(threading.Thread):
    def __init__(self, index: int, sim: "Simulator", start_offset: float):
        super().__init__(name=f"sim-worker-{index}", daemon=True)
        self.index = index
        self.sim = sim
        self.start_offset = start_offset
        self.rng = random.Random(f"{sim.profile.seed}:{index}")
        self.worker_id = f"sim-w{index}"
        self.force_comply = False
        self._attempt = 0

    def _headers(self):
        return {"X-Worker-Token": self.worker_id}

    def _idem(self) -> str:
        self._attempt += 1
        return f"{self.sim.profile.seed}-{self.worker_id}-{self._attempt}"

    def run(self):
        sim = self.sim
        profile = sim.profile
        time.sleep(self.start_offset)
        with httpx.Client(base_url=sim.server, timeout=30.0) as client:
            while not sim.stop.is_set():
                resp = client.post("/work/claim", headers=self._headers())
                if resp.status_code == 404:
                    time.sleep(profile.claim_poll_seconds)
                    continue
                if resp.status_code == 409:
                    # already submitted on every open task
                    time.sleep(profile.claim_poll_seconds)
                    continue
                resp.raise_for_status()
                offer = resp.json()
                self._work(client, offer)

    def _work(self, client: httpx.Client, offer: dict):
        sim = self.sim
        profile = sim.profile
        claimed_at = time.monotonic()
        time.sleep(sample_distribution(profile.read_time, self.rng))
        client.post(f"/work/{offer['slot_id']}/read-bottom",
                    headers=self._headers()).raise_for_status()
        comply = self.force_comply or self.rng.random() < profile.compliance
        if comply:
            remaining = offer["time_lock_seconds"] - (time.monotonic() - claimed_at)
            if remaining > 0:
                time.sleep(remaining + 0.05)
        body = sim.next_idea()
        resp = client.post(f"/work/{offer['slot_id']}/submit",
                           json={"body": body},
                           headers={**self._headers(),
                                    "X-Idempotency-Key": self._idem()})
        resp.raise_for_status()
        outcome = resp.json()
        if outcome["accepted"]:
            sim.record_acceptance()
        else:
            sim.record_rejection(outcome["reason"])
            if outcome["reason"] == "TIME_LOCK":
                self.force_comply = True


class Simulator:
    def __init__(self, profile: SimProfile, server: str):
        self.profile = profile
        self.server = server.rstrip("/")
        self.stop = threading.Event()
        self._lock = threading.Lock()
        self._accepted = 0
        self._rejections: dict[str, int] = {}
        self._corpus: list[str] = []
        self._corpus_next = 0

    def record_acceptance(self):
        with self._lock:
            self._accepted += 1

    def record_rejection(self, reason: str):
        with self._lock:
            self._rejections[reason] = self._rejections.get(reason, 0) + 1

    def next_idea(self) -> str:
        with self._lock:
            if self._corpus_next >= len(self._corpus):
                # cycle; protocol tests only need valid-length text
                self._corpus_next = 0
            idea = self._corpus[self._corpus_next]
            self._corpus_next += 1
            return idea

    def _writer_headers(self):
        return {"X-Writer-Key": self.profile.writer_key}

    def run(self, out_dir: str) -> SimResult:
        profile = self.profile
        with open(profile.idea_source, encoding="utf-8") as fh:
            self._corpus = [line.rstrip("\n") for line in fh if line.strip()]

        with httpx.Client(base_url=self.server, timeout=30.0) as client:
            try:
                resp = client.get("/tasks", headers=self._writer_headers())
                resp.raise_for_status()
            except (httpx.HTTPError, OSError) as exc:
                raise ServerUnreachable(f"{self.server}: {exc}")
            tasks = resp.json()
            open_ids = [t["id"] for t in tasks if t["state"] == "OPEN"]
            total_slots = sum(len(t["slot_ids"]) for t in tasks
                              if t["state"] == "OPEN")
            usable = [l for l in self._corpus
                      if word_count(l) >= profile.min_idea_words]
            if len(usable) < total_slots:
                raise CorpusTooSmall(
                    f"{len(usable)} usable ideas for {total_slots} slots")
            self._corpus = usable

            # arrival offsets accumulate inter-arrival draws from a
            # dedicated stream, so they depend only on the seed
            arrival_rng = random.Random(f"{profile.seed}:arrivals")
            offset = 0.0
            workers = []
            for i in range(profile.n_workers):
                offset += sample_distribution(profile.arrival, arrival_rng)
                workers.append(_Worker(i, self, offset))
            for w in workers:
                w.start()
            try:
                while True:
                    states = []
                    for tid in open_ids:
                        r = client.get(f"/tasks/{tid}", headers=self._writer_headers())
                        r.raise_for_status()
                        states.append(r.json()["state"])
                    if all(s != "OPEN" for s in states):
                        break
                    time.sleep(0.25)
            finally:
                self.stop.set()
            for w in workers:
                w.join(timeout=30)

            return self._collect(client, open_ids, out_dir)

    def _collect(self, client: httpx.Client, task_ids: list[str],
                 out_dir: str) -> SimResult:
        os.makedirs(out_dir, exist_ok=True)
        result = SimResult(acceptances=self._accepted,
                           rejections=dict(self._rejections))
        all_latencies: list[float] = []
        for tid in task_ids:
            status = client.get(f"/tasks/{tid}",
                                headers=self._writer_headers()).json()
            t0 = _parse_iso(status["thread_created_at"])
            idea_lat = sorted(
                _parse_iso(sub["submitted_at"]) - t0
                for subs in status["ideas_by_role"].values() for sub in subs)
            if not idea_lat:
                continue
            all_latencies.extend(idea_lat)
            coverage = None
            members = None
            if status["task"]["strategy"] == "ROLE_PLAY":
                firsts = {label: min(_parse_iso(s["submitted_at"]) for s in subs)
                          for label, subs in status["ideas_by_role"].items()
                          if subs}
                # coverage defined once every character has an idea; the
                # slot roster fixes how many labels there should be
                lr = client.get(f"/tasks/{tid}/latency",
                                headers=self._writer_headers())
                server_report = lr.json() if lr.status_code == 200 else None
                n_expected = len(status["task"]["slot_ids"]) // status["task"]["per_character_quota"]
                if len(firsts) == n_expected:
                    coverage = max(firsts.values()) - t0
            else:
                server_report = client.get(
                    f"/tasks/{tid}/latency",
                    headers=self._writer_headers()).json()
                coverage = idea_lat[0]
            result.task_latencies.append(TaskLatencies(
                task_id=tid, idea_latencies=idea_lat,
                first_idea=idea_lat[0], last_idea=idea_lat[-1],
                per_character_coverage=coverage))
            if server_report is not None:
                result.server_latency_reports[tid] = server_report

        bucket = self.profile.histogram_bucket_seconds
        counts: dict[int, int] = {}
        for lat in all_latencies:
            counts[int(math.floor(lat / bucket))] = \
                counts.get(int(math.floor(lat / bucket)), 0) + 1
        result.histogram_path = os.path.join(out_dir, "latency_histogram.csv")
        with open(result.histogram_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bucket_start_seconds", "count"])
            for b in sorted(counts):
                w.writerow([f"{b * bucket:g}", counts[b]])

        def stats_of(values: list[float]) -> dict[str, float]:
            return {
                "median": statistics.median(values),
                "mean": statistics.fmean(values),
                "sd": statistics.stdev(values) if len(values) > 1 else 0.0,
            }

        firsts = [t.first_idea for t in result.task_latencies]
        lasts = [t.last_idea for t in result.task_latencies]
        coverages = [t.per_character_coverage for t in result.task_latencies
                     if t.per_character_coverage is not None]
        if firsts:
            result.summary = {
                "first_idea": stats_of(firsts),
                "per_character_coverage": stats_of(coverages) if coverages else {},
                "last_idea": stats_of(lasts),
            }
        with open(os.path.join(out_dir, "latency_summary.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["measure", "median", "mean", "sd"])
            for name, s in result.summary.items():
                if s:
                    w.writerow([name, f"{s['median']:.3f}", f"{s['mean']:.3f}",
                                f"{s['sd']:.3f}"])
        return result


def run_sim(profile: SimProfile, server: str, out_dir: str) -> SimResult:
    return Simulator(profile, server).run(out_dir)
