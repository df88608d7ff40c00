/** FIFO queue for label submissions made while offline.
 *
 * Persisted through a Storage-like backend so a reload loses nothing; flushed
 * in order on reconnect, stopping at the first failure so order is preserved.
 * Re-queuing the same (session, match, annotator) replaces the verdict in
 * place, keeping its original queue position.
 */

import type { LabelSubmission } from "./types.js";

export interface QueuedLabel extends LabelSubmission {
  session_id: string;
}

type StorageLike = Pick<Storage, "getItem" | "setItem">;

export class OfflineQueue {
  constructor(
    private readonly storage: StorageLike,
    private readonly key: string = "lexrefine-label-queue-v1",
  ) {}

  private load(): QueuedLabel[] {
    try {
      return JSON.parse(this.storage.getItem(this.key) ?? "[]") as QueuedLabel[];
    } catch {
      return [];
    }
  }

  private save(items: QueuedLabel[]): void {
    this.storage.setItem(this.key, JSON.stringify(items));
  }

  get length(): number {
    return this.load().length;
  }

  peekAll(): QueuedLabel[] {
    return this.load();
  }

  enqueue(item: QueuedLabel): void {
    const items = this.load();
    const slot = items.findIndex(
      (existing) =>
        existing.session_id === item.session_id &&
        existing.match_id === item.match_id &&
        existing.annotator_id === item.annotator_id,
    );
    if (slot >= 0) {
      items[slot] = item;
    } else {
      items.push(item);
    }
    this.save(items);
  }

  /** Post queued items oldest-first; returns how many were delivered. */
  async flush(post: (item: QueuedLabel) => Promise<void>): Promise<number> {
    const items = this.load();
    let delivered = 0;
    while (items.length > 0) {
      try {
        await post(items[0]!);
      } catch {
        break; // leave the rest queued, order intact
      }
      items.shift();
      delivered += 1;
      this.save(items);
    }
    return delivered;
  }
}
