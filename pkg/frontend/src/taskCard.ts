/** Task card view model: a task plus the annotator's local selection state. */

import type { Highlight, TaskView, Verdict } from "./types.js";

export type CardStatus = "idle" | "submitting" | "queued" | "done" | "error";

export interface TaskCard {
  task: TaskView;
  selected: Verdict | null;
  note: string;
  status: CardStatus;
  error: string | null;
}

export function newCard(task: TaskView): TaskCard {
  return { task, selected: null, note: "", status: "idle", error: null };
}

export function canSubmit(card: TaskCard): boolean {
  return card.selected !== null && card.status !== "submitting";
}

/**
 * Split post text around the highlighted span using the service's byte
 * offsets. Returns null when the offsets are out of range or split a UTF-8
 * sequence; such cards are quarantined rather than rendered misleadingly.
 */
export function splitByHighlight(
  text: string,
  highlight: Highlight,
): [string, string, string] | null {
  const bytes = new TextEncoder().encode(text);
  const { start, end } = highlight;
  if (!(Number.isInteger(start) && Number.isInteger(end))) return null;
  if (!(0 <= start && start < end && end <= bytes.length)) return null;
  const decoder = new TextDecoder("utf-8", { fatal: true });
  try {
    return [
      decoder.decode(bytes.subarray(0, start)),
      decoder.decode(bytes.subarray(start, end)),
      decoder.decode(bytes.subarray(end)),
    ];
  } catch {
    return null;
  }
}

export function isRenderable(task: TaskView): boolean {
  return splitByHighlight(task.post_text, task.highlight) !== null;
}
