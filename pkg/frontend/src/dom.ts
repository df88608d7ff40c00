/** Plain-DOM renderers. State lives in the controllers; these functions just
 * project it into elements.
 */

import { AdjudicationController } from "./adjudication.js";
import { GUIDELINES } from "./guidelines.js";
import { SessionController } from "./session.js";
import { TaskCard, canSubmit, splitByHighlight } from "./taskCard.js";
import type { ConsensusLabel, Verdict } from "./types.js";

const VERDICTS: { verdict: Verdict; key: string; label: string }[] = [
  { verdict: "TruePositive", key: "T", label: "True positive" },
  { verdict: "FalsePositive", key: "F", label: "False positive" },
  { verdict: "Unclear", key: "U", label: "Unclear" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderPostText(card: TaskCard): HTMLElement {
  const container = el("p", "post-text");
  const parts = splitByHighlight(card.task.post_text, card.task.highlight);
  if (!parts) {
    container.textContent = "(unrenderable task)";
    return container;
  }
  const [before, span, after] = parts;
  container.append(before);
  const mark = el("mark", "match-highlight", span);
  container.append(mark);
  container.append(after);
  return container;
}

export function renderTaskCard(card: TaskCard, controller: SessionController): HTMLElement {
  const root = el("section", "task-card");
  root.dataset.matchId = card.task.match_id;
  root.append(renderPostText(card));

  const meta = el("dl", "task-meta");
  for (const [key, value] of [
    ["matched term", card.task.child_term],
    ["parent term", card.task.parent_term],
    ["category", card.task.category],
  ]) {
    meta.append(el("dt", undefined, key), el("dd", undefined, value));
  }
  root.append(meta);
  root.append(el("p", "guideline-hint", card.task.guideline_hint));

  const buttons = el("div", "verdict-buttons");
  for (const { verdict, key, label } of VERDICTS) {
    const button = el("button", "verdict-button", `${label} (${key})`);
    button.dataset.verdict = verdict;
    if (card.selected === verdict) button.classList.add("selected");
    button.addEventListener("click", () => controller.select(verdict));
    buttons.append(button);
  }
  root.append(buttons);

  const note = el("textarea", "note-input") as HTMLTextAreaElement;
  note.placeholder = "optional note";
  note.value = card.note;
  note.addEventListener("input", () => controller.setNote(note.value));
  root.append(note);

  const submit = el("button", "submit-button", "Submit (Enter)") as HTMLButtonElement;
  submit.disabled = !canSubmit(card);
  submit.addEventListener("click", () => void controller.submit());
  root.append(submit);

  if (card.error) {
    root.append(el("p", "card-error", card.error));
  }
  return root;
}

export function renderGuidelinePanel(currentCategory: string | null): HTMLElement {
  const panel = el("aside", "guideline-panel");
  panel.append(el("h2", undefined, "Guidelines"));
  for (const entry of GUIDELINES) {
    const block = el("section", "guideline-entry");
    block.dataset.category = entry.category;
    if (entry.category === currentCategory) block.classList.add("current");
    block.append(el("h3", undefined, entry.label));
    const list = el("ul");
    list.append(el("li", undefined, `True: ${entry.truePositive}`));
    list.append(el("li", undefined, `False: ${entry.falsePositive}`));
    list.append(el("li", undefined, `Unclear: ${entry.unclear}`));
    block.append(list);
    panel.append(block);
  }
  return panel;
}

export function renderProgress(controller: SessionController): HTMLElement {
  const view = controller.view;
  const bar = el("div", "progress");
  if (view.stats) {
    const mine = view.stats.per_annotator[controller.annotatorId];
    const done = mine ? mine.assigned - mine.remaining : 0;
    const total = mine ? mine.assigned : 0;
    const percent = total ? Math.round((100 * done) / total) : 100;
    bar.append(el("span", "progress-text", `${done}/${total} (${percent}%)`));
    const meter = el("div", "progress-meter");
    const fill = el("div", "progress-fill");
    fill.style.width = `${percent}%`;
    meter.append(fill);
    bar.append(meter);
  }
  if (view.queuedCount > 0) {
    bar.append(el("span", "queued-count", `${view.queuedCount} queued offline`));
  }
  return bar;
}

export function renderSession(controller: SessionController): HTMLElement {
  const view = controller.view;
  const root = el("main", "annotator-app");
  root.append(renderProgress(controller));
  if (view.banner) {
    const banner = el("div", "banner", view.banner);
    const retry = el("button", "retry-button", "Retry");
    retry.addEventListener("click", () => void controller.start());
    banner.append(retry);
    root.append(banner);
  }
  if (view.phase === "complete") {
    const done = el("section", "completion");
    done.append(el("h2", undefined, "All tasks complete"));
    if (view.stats && view.stats.kappa !== undefined) {
      done.append(
        el("p", "kappa", `Inter-rater agreement (Cohen's kappa): ${view.stats.kappa.toFixed(3)}`),
      );
    } else {
      done.append(el("p", "waiting", "Waiting for the other annotator to finish."));
    }
    root.append(done);
    root.append(renderGuidelinePanel(null));
    return root;
  }
  if (view.card) {
    root.append(renderTaskCard(view.card, controller));
    root.append(renderGuidelinePanel(view.card.task.category));
  }
  return root;
}

export function renderAdjudication(controller: AdjudicationController): HTMLElement {
  const root = el("main", "adjudication-app");
  root.append(el("h2", undefined, "Disagreements"));
  if (controller.phase === "refused") {
    root.append(el("div", "refusal", controller.refusal ?? "session still open"));
    return root;
  }
  if (controller.phase === "error") {
    root.append(el("div", "banner", controller.refusal ?? "failed to load"));
    return root;
  }
  const table = el("table", "disagreement-table");
  for (const row of controller.rows) {
    const tr = el("tr");
    tr.dataset.matchId = row.match_id;
    const parts = splitByHighlight(row.task.post_text, row.task.highlight);
    tr.append(el("td", "snippet", parts ? `…${parts[1]}…` : row.task.child_term));
    for (const [annotator, verdict] of Object.entries(row.verdicts)) {
      tr.append(el("td", "verdict-cell", `${annotator}: ${verdict}`));
    }
    const decision = el("td", "decision");
    if (row.adjudicated) {
      decision.textContent = `adjudicated: ${row.adjudicated}`;
    } else {
      for (const consensus of ["Match", "Mismatch", "Uncertain"] as ConsensusLabel[]) {
        const button = el("button", "override-button", consensus);
        button.addEventListener("click", () => void controller.override(row.match_id, consensus));
        decision.append(button);
      }
    }
    tr.append(decision);
    table.append(tr);
  }
  root.append(table);
  return root;
}
