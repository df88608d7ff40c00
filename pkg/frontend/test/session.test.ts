/** Scripted end-to-end session: 50 matches, two annotators, keyboard-driven.
 * Asserts blinding throughout, kappa gating on completion, and the
 * adjudication round-trip, with the DOM rendered at every step.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { AdjudicationController } from "../src/adjudication.js";
import { ApiClient } from "../src/api.js";
import { renderAdjudication, renderSession } from "../src/dom.js";
import { OfflineQueue } from "../src/offlineQueue.js";
import { SessionController } from "../src/session.js";
import type { TaskView, Verdict } from "../src/types.js";
import { FakeAnnotationServer } from "./fakeServer.js";
import { makeTask } from "./taskCard.test.js";

const VERDICT_LITERALS = ["TruePositive", "FalsePositive", "Unclear"];

function memoryStorage() {
  const map = new Map<string, string>();
  return {
    getItem: (key: string) => map.get(key) ?? null,
    setItem: (key: string, value: string) => void map.set(key, value),
  };
}

function fiftyTasks(): TaskView[] {
  return Array.from({ length: 50 }, (_, i) =>
    makeTask(`m${String(i).padStart(2, "0")}`, `post ${i} mentions `, "spike", " casually"),
  );
}

// bob diverges from alice on four matches; two are verdict conflicts and two
// come from bob marking Unclear
function aliceVerdict(index: number): Verdict {
  return index % 7 === 0 ? "FalsePositive" : "TruePositive";
}

function bobVerdict(index: number): Verdict {
  if (index === 3 || index === 11) return "FalsePositive"; // conflicts with alice
  if (index === 5 || index === 20) return "Unclear";
  return aliceVerdict(index);
}

function keyFor(verdict: Verdict): string {
  return { TruePositive: "t", FalsePositive: "f", Unclear: "u" }[verdict];
}

describe("50-match dual-annotator session", () => {
  let server: FakeAnnotationServer;
  let api: ApiClient;
  let sessionId: string;
  const root = () => document.getElementById("app") as HTMLElement;

  beforeEach(async () => {
    document.body.innerHTML = '<div id="app"></div>';
    server = new FakeAnnotationServer(new Map([["sample-50", fiftyTasks()]]));
    api = new ApiClient("", server.fetch);
    const created = await api.createSession("sample-50", ["alice", "bob"], 1);
    sessionId = created.session_id;
  });

  async function drive(annotator: string, verdictFor: (index: number) => Verdict) {
    const controller = new SessionController(
      api,
      sessionId,
      annotator,
      new OfflineQueue(memoryStorage()),
      10,
      () => root().replaceChildren(renderSession(controller)),
    );
    await controller.start();
    let index = 0;
    while (controller.view.card) {
      const card = controller.view.card;
      // the rendered card highlights exactly the match span and submit is
      // disabled until a verdict is chosen
      const highlighted = root().querySelector(".match-highlight");
      expect(highlighted?.textContent).toBe("spike");
      const submit = root().querySelector(".submit-button") as HTMLButtonElement;
      expect(submit.disabled).toBe(true);

      await controller.handleKey(keyFor(verdictFor(index)));
      expect((root().querySelector(".submit-button") as HTMLButtonElement).disabled).toBe(false);
      await controller.handleKey("Enter");
      expect(controller.view.card?.task.match_id).not.toBe(card.task.match_id);
      index += 1;
    }
    expect(index).toBe(50);
    return controller;
  }

  it("completes with blinding, gated kappa, and a round-tripping adjudication", async () => {
    const alice = await drive("alice", aliceVerdict);

    // alice is done but the session is still open: completion screen, no kappa
    expect(alice.view.phase).toBe("complete");
    expect(alice.view.stats?.status).toBe("open");
    expect(alice.view.stats?.kappa).toBeUndefined();
    root().replaceChildren(renderSession(alice));
    expect(root().querySelector(".kappa")).toBeNull();
    expect(root().querySelector(".completion")?.textContent).toContain("Waiting");

    // adjudication is refused while the session is open, and the refusal renders
    const early = new AdjudicationController(api, sessionId, "carol");
    await early.load();
    expect(early.phase).toBe("refused");
    root().replaceChildren(renderAdjudication(early));
    expect(root().querySelector(".refusal")).not.toBeNull();

    const bob = await drive("bob", bobVerdict);
    expect(bob.view.stats?.status).toBe("complete");
    expect(bob.view.stats?.kappa).toBeDefined();
    root().replaceChildren(renderSession(bob));
    expect(root().querySelector(".kappa")?.textContent).toContain("kappa");

    // blinding: while the session was open, no response body ever carried a verdict
    const openResponses = server.auditLog.filter((entry) => entry.sessionOpen);
    expect(openResponses.length).toBeGreaterThan(100);
    for (const entry of openResponses) {
      for (const literal of VERDICT_LITERALS) {
        expect(entry.body, `${entry.method} ${entry.path}`).not.toContain(literal);
      }
    }

    // consensus before adjudication: 4 disagreements -> Uncertain
    const statsBefore = await api.stats(sessionId);
    expect(statsBefore.consensus_counts).toEqual({
      Match: 38,
      Mismatch: 8,
      Uncertain: 4,
    });

    const adjudication = new AdjudicationController(api, sessionId, "carol");
    await adjudication.load();
    expect(adjudication.phase).toBe("ready");
    expect(adjudication.rows).toHaveLength(4);
    root().replaceChildren(renderAdjudication(adjudication));
    expect(root().querySelectorAll(".disagreement-table tr")).toHaveLength(4);

    // override one disagreement and watch it round-trip through the stats
    await adjudication.override(adjudication.rows[0]!.match_id, "Match");
    const row = adjudication.rows.find((r) => r.adjudicated !== null);
    expect(row?.adjudicated).toBe("Match");
    const statsAfter = await api.stats(sessionId);
    expect(statsAfter.status).toBe("adjudicated");
    expect(statsAfter.consensus_counts).toEqual({
      Match: 39,
      Mismatch: 8,
      Uncertain: 3,
    });
  });

  it("reverts the card and shows the error when the server rejects a submit", async () => {
    let sabotage = false;
    const saboteur = new ApiClient("", async (url, init) => {
      if (sabotage && url.includes("/labels")) {
        sabotage = false;
        return new Response(
          JSON.stringify({ error: "bad-assignment", detail: "rejected by test" }),
          { status: 403, headers: { "content-type": "application/json" } },
        );
      }
      return server.fetch(url, init);
    });
    const controller = new SessionController(
      saboteur,
      sessionId,
      "alice",
      new OfflineQueue(memoryStorage()),
      10,
      () => root().replaceChildren(renderSession(controller)),
    );
    await controller.start();
    const first = controller.view.card!.task.match_id;
    sabotage = true;
    controller.select("TruePositive");
    await controller.submit();
    // same card is back, with the problem detail displayed
    expect(controller.view.card?.task.match_id).toBe(first);
    expect(controller.view.card?.error).toBe("rejected by test");
    root().replaceChildren(renderSession(controller));
    expect(root().querySelector(".card-error")?.textContent).toBe("rejected by test");
    // a retry succeeds
    await controller.submit();
    expect(controller.view.card?.task.match_id).not.toBe(first);
  });

  it("queues submissions while offline and flushes them in order on reconnect", async () => {
    const controller = new SessionController(
      api,
      sessionId,
      "alice",
      new OfflineQueue(memoryStorage()),
      10,
      () => root().replaceChildren(renderSession(controller)),
    );
    await controller.start();
    server.offline = true;
    const offlineIds: string[] = [];
    for (let i = 0; i < 3; i++) {
      offlineIds.push(controller.view.card!.task.match_id);
      controller.select("TruePositive");
      await controller.submit();
    }
    expect(controller.view.queuedCount).toBe(3);
    expect(controller.view.banner).toContain("offline");
    root().replaceChildren(renderSession(controller));
    expect(root().querySelector(".queued-count")?.textContent).toContain("3 queued");

    server.offline = false;
    const posted: string[] = [];
    const audit_start = server.auditLog.length;
    await controller.flushQueue();
    for (const entry of server.auditLog.slice(audit_start)) {
      if (entry.path.includes("/labels")) {
        posted.push(JSON.parse(entry.body).match_id);
      }
    }
    expect(posted).toEqual(offlineIds);
    expect(controller.view.queuedCount).toBe(0);
    expect(controller.view.stats?.labels_recorded).toBe(3);
  });

  it("quarantines tasks with invalid highlight offsets", async () => {
    const tasks = fiftyTasks().slice(0, 3);
    tasks[1] = { ...tasks[1]!, highlight: { start: 5, end: 9999 } };
    const broken = new FakeAnnotationServer(new Map([["sample-bad", tasks]]));
    const brokenApi = new ApiClient("", broken.fetch);
    const created = await brokenApi.createSession("sample-bad", ["alice", "bob"]);
    const controller = new SessionController(
      brokenApi,
      created.session_id,
      "alice",
      new OfflineQueue(memoryStorage()),
      10,
      () => root().replaceChildren(renderSession(controller)),
    );
    await controller.start();
    expect(controller.view.quarantined).toEqual([tasks[1]!.match_id]);
    expect(controller.view.banner).toContain("invalid highlight offsets");
    const seen: string[] = [];
    while (controller.view.card) {
      seen.push(controller.view.card.task.match_id);
      controller.select("TruePositive");
      await controller.submit();
    }
    expect(seen).not.toContain(tasks[1]!.match_id);
  });
});
