/** Bootstrap: read ?session=&annotator=(&role=adjudicator), wire the keyboard
 * loop and the offline queue, and re-render on every state change.
 */

import { AdjudicationController } from "./adjudication.js";
import { ApiClient } from "./api.js";
import { renderAdjudication, renderSession } from "./dom.js";
import { OfflineQueue } from "./offlineQueue.js";
import { SessionController } from "./session.js";

export function bootstrap(root: HTMLElement, search = window.location.search): void {
  const params = new URLSearchParams(search);
  const sessionId = params.get("session") ?? "";
  const annotatorId = params.get("annotator") ?? "";
  const api = new ApiClient("");

  if (!sessionId) {
    root.textContent = "missing ?session=<id> in the URL";
    return;
  }

  if (params.get("role") === "adjudicator") {
    const controller = new AdjudicationController(api, sessionId, annotatorId || "adjudicator", () => {
      root.replaceChildren(renderAdjudication(controller));
    });
    void controller.load();
    return;
  }

  if (!annotatorId) {
    root.textContent = "missing ?annotator=<id> in the URL";
    return;
  }

  const queue = new OfflineQueue(window.localStorage);
  const controller = new SessionController(api, sessionId, annotatorId, queue, 10, () => {
    root.replaceChildren(renderSession(controller));
  });

  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "TEXTAREA") return; // let notes be typed
    void controller.handleKey(event.key);
  });
  window.addEventListener("online", () => void controller.flushQueue());

  void controller.start().then(() => controller.flushQueue());
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app") as HTMLElement);
}
