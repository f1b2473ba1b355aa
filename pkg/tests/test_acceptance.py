"""Top-level acceptance suite.  Each test is one shippable criterion; the
terminal summary (see conftest.py) prints one verdict line per criterion."""

import json
import math
import random
import statistics
import threading
import time
from pathlib import Path

import httpx
import numpy as np
import pytest

from storycrowd import errors
from storycrowd.distance import (Aggregation, EmbeddingStore, cosine_distance,
                                 embed_sum, sentence_pair_distance,
                                 word_sum_vectorizer)
from storycrowd.orchestrator import (Orchestrator, OrchestratorConfig,
                                     RejectReason, Rejection, Strategy,
                                     compute_reward)
from storycrowd.stats import (build_study_report, ci95_mean, cohens_d_paired,
                              kendall_tau, paired_t_test, pearson)
from storycrowd.workspace import Workspace

import oracles
from test_sim import LiveServer, WRITER, make_profile
from test_store import new_store, seeded_ops
from storycrowd.config import Config
from storycrowd.sim import Simulator

DATA = Path(__file__).parent / "data"


def test_payment_formula():
    assert compute_reward(1000) == 200
    assert compute_reward(0) == 100
    rng = random.Random(1)
    for _ in range(200):
        w = rng.randint(0, 5000)
        assert compute_reward(w + 1000) - compute_reward(w) == 100


def make_task(orch, ws, size, quota, strategy, tag=""):
    chars = [ws.create_character(f"c{tag}{i}", "d") for i in range(size)]
    team = ws.create_team(f"t{tag}", [c.id for c in chars])
    body = " ".join(f"p{tag}x{i}" for i in range(40))
    doc = ws.create_document(f"doc{tag}", body)
    return orch.create_ideation_task(doc.id, 0, len(body), team.id,
                                     strategy=strategy,
                                     per_character_quota=quota, now=0.0)


def test_slot_algebra():
    start = time.monotonic()
    rng = random.Random(2)
    for i in range(200):
        ws = Workspace()
        orch = Orchestrator(ws, OrchestratorConfig())
        size = rng.randint(1, 5)
        quota = rng.randint(1, 5)
        strategy = rng.choice([Strategy.ROLE_PLAY, Strategy.NO_ROLE])
        task = make_task(orch, ws, size, quota, strategy, tag=str(i))
        assert len(task.slot_ids) == size * quota

    # 100 workers hammer one 4x5 task concurrently
    ws = Workspace()
    orch = Orchestrator(ws, OrchestratorConfig(time_lock_seconds=0.0))
    task = make_task(orch, ws, 4, 5, Strategy.ROLE_PLAY, tag="stress")
    idea = " ".join(f"idea{i}" for i in range(60))
    accepted = []
    barrier = threading.Barrier(100)

    def worker(n):
        barrier.wait()
        try:
            offer = orch.claim_assignment(f"w{n}", now=0.0)
        except (errors.NoWorkAvailable, errors.AlreadyWorkedTask):
            return
        orch.attest_read_bottom(offer.slot_id, f"w{n}")
        result = orch.submit_idea(offer.slot_id, f"w{n}", idea, now=100.0)
        if not isinstance(result, Rejection):
            accepted.append(result)

    threads = [threading.Thread(target=worker, args=(n,)) for n in range(100)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(accepted) == 20
    per_role = {}
    for sub in accepted:
        role = orch.slots[sub.slot_id].role
        per_role[role] = per_role.get(role, 0) + 1
    assert all(count == 5 for count in per_role.values())
    assert time.monotonic() - start < 30


def test_integrity_gates():
    start = time.monotonic()
    rng = random.Random(3)
    prompt_tokens = [f"p{i}" for i in range(40)]
    for _ in range(1000):
        ws = Workspace()
        orch = Orchestrator(ws, OrchestratorConfig())  # 30 s lock, 50 words
        char = ws.create_character("c", "d")
        team = ws.create_team("t", [char.id])
        doc = ws.create_document("doc", " ".join(prompt_tokens))
        orch.create_ideation_task(doc.id, 0, len(doc.body), team.id,
                                  per_character_quota=1, now=0.0)
        offer = orch.claim_assignment("w", now=0.0)
        attested = rng.random() < 0.85
        if attested:
            orch.attest_read_bottom(offer.slot_id, "w")
        elapsed = rng.choice([rng.uniform(0, 30), 30.0, rng.uniform(30, 90)])
        n_words = rng.choice([rng.randint(1, 49), 50, rng.randint(50, 120)])
        words = [f"w{i}" for i in range(n_words)]
        copied = rng.random() < 0.25
        if copied:
            words.extend(prompt_tokens[:20])  # verbatim 20-token span
        body = " ".join(words)
        result = orch.submit_idea(offer.slot_id, "w", body, now=elapsed)

        if elapsed < 30:
            assert isinstance(result, Rejection)
            assert result.reason is RejectReason.TIME_LOCK
        elif not attested:
            assert isinstance(result, Rejection)
            assert result.reason is RejectReason.NO_READ_ATTESTATION
        elif len(words) < 50:
            assert isinstance(result, Rejection)
            assert result.reason is RejectReason.TOO_SHORT
        elif copied:
            assert isinstance(result, Rejection)
            assert result.reason is RejectReason.COPY_OVERLAP
        else:
            assert not isinstance(result, Rejection)
    assert time.monotonic() - start < 30


def test_distance_oracle():
    start = time.monotonic()
    store = EmbeddingStore(dimension=2, table={
        "a": np.array([1.0, 0.0]),
        "b": np.array([0.0, 1.0]),
        "c": np.array([1.0, 1.0]),
    })
    vec = word_sum_vectorizer(store)

    # hand enumeration on the 3-token store
    assert embed_sum("a b oov", store).values.tolist() == [1.0, 1.0]
    assert abs(cosine_distance([1, 0], [0, 1]) - 1.0) < 1e-12
    assert abs(cosine_distance([1, 0], [1, 1]) - (1 - 1 / math.sqrt(2))) < 1e-12
    # doc A = [a], [b]; doc B = [c]; pair distances both 1 - 1/sqrt(2)
    d = 1 - 1 / math.sqrt(2)
    for agg in Aggregation:
        got = sentence_pair_distance(["a", "b"], ["c"], vec, agg)
        assert abs(got - d) < 1e-12
    # doc A = [a]; doc B = [b], [c]: distances {1, d}
    assert abs(sentence_pair_distance(["a"], ["b", "c"], vec,
                                      Aggregation.MEAN) - (1 + d) / 2) < 1e-12
    assert abs(sentence_pair_distance(["a"], ["b", "c"], vec,
                                      Aggregation.MIN) - d) < 1e-12
    assert abs(sentence_pair_distance(["a"], ["b", "c"], vec,
                                      Aggregation.MEDIAN) - (1 + d) / 2) < 1e-12

    rng = random.Random(4)
    for _ in range(500):
        dim = rng.randint(2, 5)
        vocab = {f"t{i}": np.array([rng.gauss(0, 1) for _ in range(dim)])
                 for i in range(10)}
        rstore = EmbeddingStore(dimension=dim, table=vocab)
        rvec = word_sum_vectorizer(rstore)

        def sent():
            return " ".join(rng.choices(list(vocab), k=rng.randint(1, 4)))

        doc_a = [sent() for _ in range(rng.randint(1, 4))]
        doc_b = [sent() for _ in range(rng.randint(1, 4))]

        # brute force, computed with plain numpy
        def raw(sentence):
            return sum(vocab[t] for t in sentence.split())

        dists = sorted(
            1 - np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
            for u in map(raw, doc_a) for v in map(raw, doc_b))
        mean = sentence_pair_distance(doc_a, doc_b, rvec, Aggregation.MEAN)
        mn = sentence_pair_distance(doc_a, doc_b, rvec, Aggregation.MIN)
        med = sentence_pair_distance(doc_a, doc_b, rvec, Aggregation.MEDIAN)
        assert abs(mean - sum(dists) / len(dists)) < 1e-12
        assert abs(mn - dists[0]) < 1e-12
        assert abs(med - statistics.median(dists)) < 1e-12
        assert dists[0] - 1e-12 <= mn <= med <= dists[-1] + 1e-12
        assert dists[0] - 1e-12 <= mean <= dists[-1] + 1e-12

        # symmetry
        assert abs(mean - sentence_pair_distance(doc_b, doc_a, rvec,
                                                 Aggregation.MEAN)) < 1e-12
        # scale invariance of the cosine distance
        u, v = raw(doc_a[0]), raw(doc_b[0])
        s, t = rng.uniform(0.1, 10), rng.uniform(0.1, 10)
        assert abs(cosine_distance(u, v) -
                   cosine_distance(s * u, t * v)) < 1e-12
        # additivity of the sum embedding
        joined = doc_a[0] + " " + doc_b[0]
        assert np.allclose(embed_sum(joined, rstore).values,
                           embed_sum(doc_a[0], rstore).values
                           + embed_sum(doc_b[0], rstore).values, atol=1e-12)
    assert time.monotonic() - start < 10


def test_statistics_oracle():
    rng = random.Random(5)
    quantile_cache = {}
    for _ in range(500):
        n = rng.randint(3, 14)
        x = [rng.uniform(1, 5) for _ in range(n)]
        y = [v + rng.gauss(0, 1) for v in x]
        if rng.random() < 0.3:  # exercise tie handling
            x = [round(v, 0) for v in x]
            y = [round(v, 0) for v in y]
            if len(set(x)) < 2 or len(set(y)) < 2 or len(set(
                    a - b for a, b in zip(x, y))) < 2:
                continue

        assert pearson(x, y) == pytest.approx(
            oracles.pearson_oracle(x, y), abs=1e-8)
        assert kendall_tau(x, y) == pytest.approx(
            oracles.kendall_tau_b_oracle(x, y), abs=1e-8)
        t_got = paired_t_test(x, y)
        t_exp, df_exp, p_exp = oracles.paired_t_oracle(x, y)
        assert t_got.t == pytest.approx(t_exp, abs=1e-8)
        assert t_got.df == df_exp
        assert t_got.p_two_tailed == pytest.approx(p_exp, abs=1e-8)
        assert cohens_d_paired(x, y) == pytest.approx(
            oracles.cohens_d_oracle(x, y), abs=1e-8)
        lo, hi = ci95_mean(x)
        if n not in quantile_cache:
            quantile_cache[n] = oracles.t_quantile(0.975, n - 1)
        sd = statistics.stdev(x)
        half = quantile_cache[n] * sd / math.sqrt(n)
        mean = statistics.fmean(x)
        assert lo == pytest.approx(mean - half, abs=1e-8)
        assert hi == pytest.approx(mean + half, abs=1e-8)

    # bundled synthetic study reproduces its golden report
    report = build_study_report(str(DATA / "ratings.csv"),
                                str(DATA / "distances.csv"))
    golden = json.loads((DATA / "golden_report.json").read_text())
    assert report.n_stories == golden["n_stories"]
    for aspect, conds in golden["conditions"].items():
        for cond, stats in conds.items():
            got = report.conditions[aspect][cond]
            assert got.mean == pytest.approx(stats["mean"], abs=1e-9)
            assert got.ci95_low == pytest.approx(stats["ci95_low"], abs=1e-9)
            assert got.ci95_high == pytest.approx(stats["ci95_high"], abs=1e-9)
    for aspect, cmp_ in golden["comparisons"].items():
        got = report.comparisons[aspect]
        assert got.t == pytest.approx(cmp_["t"], abs=1e-9)
        assert got.df == cmp_["df"]
        assert got.p_two_tailed == pytest.approx(cmp_["p_two_tailed"], abs=1e-9)
        assert got.cohens_d == pytest.approx(cmp_["cohens_d"], abs=1e-9)
    for metric, corr in golden["correlations"].items():
        got = report.correlations[metric]
        assert got.pearson_rho == pytest.approx(corr["pearson_rho"], abs=1e-9)
        assert got.kendall_tau == pytest.approx(corr["kendall_tau"], abs=1e-9)
        assert got.n_items == corr["n_items"]


def test_durability(tmp_path):
    for seed in range(100):
        d = tmp_path / f"run-{seed}"
        store = new_store(d)
        seeded_ops(store, random.Random(seed), n_ops=25)
        before = store.state_dict()
        del store  # crash: nothing closed, nothing snapshotted
        assert new_store(d).state_dict() == before

    # snapshot + tail replay lands on the same state as full-log replay
    a_dir, b_dir = tmp_path / "snap", tmp_path / "full"
    store_a, store_b = new_store(a_dir), new_store(b_dir)
    rng_a, rng_b = random.Random(777), random.Random(777)
    seeded_ops(store_a, rng_a, n_ops=25)
    seeded_ops(store_b, rng_b, n_ops=25)
    store_a.snapshot()
    seeded_ops(store_a, rng_a, n_ops=25)
    seeded_ops(store_b, rng_b, n_ops=25)
    assert store_a.state_dict() == store_b.state_dict()
    del store_a, store_b
    assert new_store(a_dir).state_dict() == new_store(b_dir).state_dict()


def seed_mixed_tasks(url: str, quota=3):
    """Three documents with 2, 3, and 2 characters."""
    task_ids = []
    with httpx.Client(base_url=url, timeout=10.0) as client:
        for d, n_chars in enumerate((2, 3, 2)):
            char_ids = [client.post("/characters", headers=WRITER,
                                    json={"name": f"Char {d}-{c}",
                                          "description": "a role"}).json()["id"]
                        for c in range(n_chars)]
            team = client.post("/teams", headers=WRITER,
                               json={"name": f"Team {d}",
                                     "member_ids": char_ids}).json()
            body = " ".join(f"scene{d}word{i}" for i in range(40))
            doc = client.post("/documents", headers=WRITER,
                              json={"title": f"Doc {d}", "body": body}).json()
            task = client.post(f"/documents/{doc['id']}/tasks", headers=WRITER,
                               json={"start": 0, "end": len(body),
                                     "team_id": team["id"],
                                     "per_character_quota": quota}).json()
            task_ids.append(task["id"])
    return task_ids


def test_end_to_end_simulation(tmp_path):
    start = time.monotonic()
    histograms = []
    for attempt in ("a", "b"):
        cfg = Config(
            time_lock_seconds=2.0,
            embedding_path=str(DATA / "embeddings.txt"),
            data_dir=str(tmp_path / f"data-{attempt}"),
            writer_key="simkey",
        )
        server = LiveServer(cfg).start()
        try:
            task_ids = seed_mixed_tasks(server.url)
            profile = make_profile(tmp_path, n_workers=30)
            result = Simulator(profile, server.url).run(
                str(tmp_path / f"out-{attempt}"))
            histograms.append(Path(result.histogram_path).read_bytes())
            if attempt == "b":
                continue

            with httpx.Client(base_url=server.url, timeout=10.0) as client:
                total_replies = 0
                for tid in task_ids:
                    status = client.get(f"/tasks/{tid}", headers=WRITER).json()
                    assert status["state"] == "COMPLETE"
                    # every character got at least one accepted idea
                    roster = len(status["task"]["slot_ids"]) // 3
                    ideas = status["ideas_by_role"]
                    assert len(ideas) == roster
                    assert all(len(subs) >= 1 for subs in ideas.values())
                    doc = client.get(
                        f"/documents/{status['task']['document_id']}",
                        headers=WRITER).json()
                    thread = next(th for th in doc["threads"]
                                  if th["id"] == status["task"]["thread_id"])
                    total_replies += len(thread["replies"])
                assert total_replies == result.acceptances == 21

            for tl in result.task_latencies:
                report = result.server_latency_reports[tl.task_id]
                assert tl.first_idea == pytest.approx(
                    report["first_idea_seconds"], abs=1e-3)
                assert tl.last_idea == pytest.approx(
                    report["last_idea_seconds"], abs=1e-3)
                assert tl.per_character_coverage == pytest.approx(
                    report["per_character_coverage_seconds"], abs=1e-3)
        finally:
            server.stop()
    assert histograms[0] == histograms[1]
    assert time.monotonic() - start < 120
