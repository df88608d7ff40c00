/** Annotator session loop: fetch blinded tasks, submit verdicts optimistically,
 * queue submissions while offline, and track progress purely from the stats
 * endpoint (the UI computes no statistics of its own).
 */

import { ApiClient, ApiError } from "./api.js";
import { OfflineQueue } from "./offlineQueue.js";
import { TaskCard, canSubmit, isRenderable, newCard } from "./taskCard.js";
import type { SessionStats, TaskView, Verdict } from "./types.js";

const KEY_TO_VERDICT: Record<string, Verdict> = {
  t: "TruePositive",
  f: "FalsePositive",
  u: "Unclear",
};

export type SessionPhase = "loading" | "labeling" | "complete" | "error";

export interface SessionViewState {
  phase: SessionPhase;
  card: TaskCard | null;
  stats: SessionStats | null;
  banner: string | null;
  queuedCount: number;
  quarantined: string[]; // match ids surfaced as data errors
}

export class SessionController {
  private buffer: TaskCard[] = [];
  private inFlight = new Set<string>();
  private locallyLabeled = new Set<string>();
  private quarantined: TaskView[] = [];
  private stats: SessionStats | null = null;
  private banner: string | null = null;
  private phase: SessionPhase = "loading";
  private exhausted = false;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly annotatorId: string,
    private readonly queue: OfflineQueue,
    private readonly pageSize: number = 10,
    private readonly onChange: () => void = () => {},
  ) {}

  get view(): SessionViewState {
    return {
      phase: this.phase,
      card: this.buffer[0] ?? null,
      stats: this.stats,
      banner: this.banner,
      queuedCount: this.queue.length,
      quarantined: this.quarantined.map((t) => t.match_id),
    };
  }

  async start(): Promise<void> {
    this.banner = null;
    try {
      await this.refill();
      await this.refreshStats();
      this.phase = this.buffer.length ? "labeling" : "complete";
    } catch (error) {
      this.phase = "error";
      this.banner = describe(error);
    }
    this.onChange();
  }

  private async refill(): Promise<void> {
    if (this.exhausted && this.buffer.length > 0) return;
    const fetched = await this.api.fetchTasks(this.sessionId, this.annotatorId, this.pageSize);
    this.exhausted = fetched.length < this.pageSize;
    const known = new Set(this.buffer.map((c) => c.task.match_id));
    for (const task of fetched) {
      if (known.has(task.match_id)) continue;
      if (this.inFlight.has(task.match_id) || this.locallyLabeled.has(task.match_id)) continue;
      if (this.quarantined.some((q) => q.match_id === task.match_id)) continue;
      if (!isRenderable(task)) {
        this.quarantined.push(task);
        this.banner = `task ${task.match_id} has invalid highlight offsets; skipped`;
        continue;
      }
      this.buffer.push(newCard(task));
    }
  }

  select(verdict: Verdict): void {
    const card = this.buffer[0];
    if (!card) return;
    card.selected = verdict;
    card.error = null;
    this.onChange();
  }

  setNote(note: string): void {
    const card = this.buffer[0];
    if (card) card.note = note;
    this.onChange();
  }

  /** Optimistic submit: advance immediately, revert the card on rejection. */
  async submit(): Promise<void> {
    const card = this.buffer[0];
    if (!card || !canSubmit(card)) return;
    const verdict = card.selected as Verdict;
    card.status = "submitting";
    this.buffer.shift();
    this.inFlight.add(card.task.match_id);
    this.onChange();

    try {
      await this.api.submitLabel(this.sessionId, {
        match_id: card.task.match_id,
        annotator_id: this.annotatorId,
        verdict,
        note: card.note || undefined,
      });
      card.status = "done";
      this.locallyLabeled.add(card.task.match_id);
      this.banner = null;
    } catch (error) {
      if (error instanceof ApiError) {
        // the server said no: bring the card back with the problem detail
        card.status = "error";
        card.error = error.detail;
        this.buffer.unshift(card);
      } else {
        // network trouble: keep going, the queue flushes on reconnect
        card.status = "queued";
        this.locallyLabeled.add(card.task.match_id);
        this.queue.enqueue({
          session_id: this.sessionId,
          match_id: card.task.match_id,
          annotator_id: this.annotatorId,
          verdict,
          note: card.note || undefined,
        });
        this.banner = "offline: submissions are queued and will flush on reconnect";
      }
    } finally {
      this.inFlight.delete(card.task.match_id);
    }

    if (this.buffer.length < Math.ceil(this.pageSize / 2)) {
      try {
        await this.refill();
      } catch {
        this.banner = "cannot reach the server; retry when back online";
      }
    }
    try {
      await this.refreshStats();
    } catch {
      // stats refresh is best-effort; the next submit retries it
    }
    if (this.buffer.length === 0 && this.queue.length === 0) {
      this.phase = "complete";
    }
    this.onChange();
  }

  async refreshStats(): Promise<void> {
    this.stats = await this.api.stats(this.sessionId);
    this.onChange();
  }

  async flushQueue(): Promise<number> {
    const delivered = await this.queue.flush(async (item) => {
      await this.api.submitLabel(item.session_id, {
        match_id: item.match_id,
        annotator_id: item.annotator_id,
        verdict: item.verdict,
        note: item.note,
      });
    });
    if (delivered > 0) {
      this.banner = null;
      await this.refreshStats();
      if (this.buffer.length === 0 && this.queue.length === 0) this.phase = "complete";
    }
    this.onChange();
    return delivered;
  }

  /** T/F/U pick a verdict, Enter submits; the whole loop is keyboard-driven. */
  async handleKey(key: string): Promise<void> {
    const verdict = KEY_TO_VERDICT[key.toLowerCase()];
    if (verdict) {
      this.select(verdict);
      return;
    }
    if (key === "Enter") {
      await this.submit();
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.detail;
  return error instanceof Error ? error.message : String(error);
}
