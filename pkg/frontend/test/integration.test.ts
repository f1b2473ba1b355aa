// Runs the full writer flow against a real service instance: launch a task
// from a text selection, play two crowd workers over the worker API, and
// check that accepted ideas thread under the overview comment and that the
// sidebar's ranked order matches the ?rank= endpoint.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { StorycrowdApi } from "../src/api.js";

const here = fileURLToPath(new URL(".", import.meta.url));
const embeddings = resolve(here, "../../tests/data/embeddings.txt");
const PORT = 18350 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const WRITER_KEY = "frontend-test-key";
const TIME_LOCK = 0.5;

let service: ChildProcess;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 15_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/tasks`, {
        headers: { "X-Writer-Key": WRITER_KEY },
      });
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "storycrowd-fe-"));
  const config = join(dir, "service.conf");
  writeFileSync(
    config,
    [
      `listen_address = 127.0.0.1:${PORT}`,
      `data_dir = ${join(dir, "data")}`,
      `writer_key = ${WRITER_KEY}`,
      `embedding_path = ${embeddings}`,
      `time_lock_seconds = ${TIME_LOCK}`,
      "",
    ].join("\n"),
  );
  service = spawn("python3", ["-m", "storycrowd.cli", "serve", "--config", config], {
    stdio: "ignore",
  });
  await waitForService();
}, 30_000);

afterAll(() => {
  service?.kill();
});

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

function idea(tag: string): string {
  // 55 words from story vocabulary, disjoint from the document text below
  const vocab = [
    "dragon", "knight", "queen", "castle", "storm", "river", "bridge",
    "letter", "secret", "shadow", "garden", "treasure", "journey", "promise",
  ];
  const words: string[] = [tag];
  for (let i = 0; i < 54; i++) words.push(vocab[(i * 7 + tag.length) % vocab.length]);
  return words.join(" ");
}

async function playWorker(token: string): Promise<string> {
  const api = new StorycrowdApi(BASE, { workerToken: token });
  const offer = await api.claim();
  expect(offer.role_name).toBeTruthy();
  // the offer must not leak anything beyond the prompt, note and role card
  expect(JSON.stringify(offer)).not.toContain("image_ref");
  await api.readBottom(offer.slot_id);
  await sleep(TIME_LOCK * 1000 + 100);
  const body = idea(`from-${token}`);
  const outcome = await api.submit(offer.slot_id, body, `${token}-1`);
  expect(outcome.accepted).toBe(true);
  return body;
}

describe("writer flow against a live service", () => {
  it("selection -> task -> worker ideas -> threaded, ranked replies", async () => {
    const writer = new StorycrowdApi(BASE, { writerKey: WRITER_KEY });

    const ada = await writer.createCharacter({
      name: "Ada",
      description: "a meticulous archivist",
    });
    const bram = await writer.createCharacter({
      name: "Bram",
      description: "a restless cartographer",
    });
    const team = await writer.createTeam({
      name: "Pathfinders",
      member_ids: [ada.id, bram.id],
    });

    const body =
      "The lighthouse keeper counted the ships as they slipped past the " +
      "headland, and none of them ever stopped, until the morning one did.";
    const doc = await writer.createDocument({ title: "Draft one", body });

    // select the second half of the draft, as the editor would
    const start = body.indexOf("and none");
    const end = body.length;
    const task = await writer.createTask(doc.id, {
      start,
      end,
      team_id: team.id,
      note: "what happens next?",
      per_character_quota: 1,
    });
    expect(task.prompt.snapshot).toBe(body.slice(start, end));
    expect(task.slot_ids.length).toBe(2);

    // the overview comment lists the team roster
    let view = await writer.getDocument(doc.id);
    expect(view.threads.length).toBe(1);
    expect(view.threads[0].overview).toContain("Ada");
    expect(view.threads[0].overview).toContain("Bram");
    expect(view.threads[0].replies.length).toBe(0);

    const bodies = [await playWorker("crowd-a"), await playWorker("crowd-b")];

    // replies must show up within one 2 s poll interval of acceptance
    const deadline = Date.now() + 2000;
    let replies = (await writer.getDocument(doc.id)).threads[0].replies;
    while (replies.length < 2 && Date.now() < deadline) {
      await sleep(200);
      replies = (await writer.getDocument(doc.id)).threads[0].replies;
    }
    expect(replies.map((r) => r.body).sort()).toEqual([...bodies].sort());
    const status = await writer.getTask(task.id);
    expect(status.state).toBe("COMPLETE");
    expect(Object.keys(status.ideas_by_role).sort()).toEqual(["Ada", "Bram"]);

    // ranked view: same ideas, farthest first, matching the API's order
    const ranked = await writer.getIdeas(task.id, "wordsum");
    expect(ranked.ideas.length).toBe(2);
    expect(ranked.ideas.map((i) => i.body).sort()).toEqual([...bodies].sort());
    const distances = ranked.ideas.map((i) => i.distance ?? -1);
    expect(distances[0]).toBeGreaterThanOrEqual(distances[1]);
    for (const i of ranked.ideas) expect(i.unscored).toBe(false);
  }, 30_000);

  it("a premature submission is rejected with the remaining lock time", async () => {
    const writer = new StorycrowdApi(BASE, { writerKey: WRITER_KEY });
    const solo = await writer.createCharacter({ name: "Nix", description: "a ghost" });
    const team = await writer.createTeam({ name: "Solo", member_ids: [solo.id] });
    const doc = await writer.createDocument({
      title: "Draft two",
      body: "A short draft that still needs one single idea from the crowd.",
    });
    await writer.createTask(doc.id, {
      start: 0,
      end: 20,
      team_id: team.id,
      per_character_quota: 1,
    });

    const api = new StorycrowdApi(BASE, { workerToken: "eager" });
    const offer = await api.claim();
    await api.readBottom(offer.slot_id);
    const early = await api.submit(offer.slot_id, idea("early"), "eager-1");
    expect(early.accepted).toBe(false);
    expect(early.reason).toBe("TIME_LOCK");
    expect(early.retry_after_seconds).toBeGreaterThan(0);

    // the slot was released; finish it properly so the task completes
    const retry = await api.claim();
    await api.readBottom(retry.slot_id);
    await sleep(TIME_LOCK * 1000 + 100);
    const outcome = await api.submit(retry.slot_id, idea("patient"), "eager-2");
    expect(outcome.accepted).toBe(true);
  }, 30_000);
});
