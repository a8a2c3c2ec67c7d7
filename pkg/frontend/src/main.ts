/**
 * Browser entry point: wires the session state machine to the page.
 *
 * Expects index.html to provide #app, #status, and a ?annotator=ID query
 * parameter (defaults to "reviewer"). The service URL comes from
 * ?service=..., defaulting to the same origin the page was served from.
 */

import { ApiClient } from "./api.js";
import { AnnotationSession } from "./session.js";
import { renderDone, renderError, renderProgress, renderTask } from "./view.js";

async function refresh(
  session: AnnotationSession,
  client: ApiClient,
  app: HTMLElement,
  status: HTMLElement,
): Promise<void> {
  const task = session.currentTask;
  app.innerHTML = task === null ? renderDone(session.submitted) : renderTask(task);
  status.innerHTML = renderProgress(await client.getProgress());
  for (const button of app.querySelectorAll<HTMLButtonElement>(".label-button")) {
    button.addEventListener("click", () => {
      void submit(session, client, app, status, button.dataset.label ?? "");
    });
  }
}

async function submit(
  session: AnnotationSession,
  client: ApiClient,
  app: HTMLElement,
  status: HTMLElement,
  label: string,
): Promise<void> {
  try {
    await session.submitLabel(label);
    await refresh(session, client, app, status);
  } catch (error) {
    app.innerHTML = renderError(error instanceof Error ? error.message : String(error));
  }
}

export async function bootstrap(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const annotatorId = params.get("annotator") ?? "reviewer";
  const serviceUrl = params.get("service") ?? window.location.origin;
  const app = document.getElementById("app");
  const status = document.getElementById("status");
  if (app === null || status === null) {
    throw new Error("index.html must define #app and #status");
  }
  const client = new ApiClient(serviceUrl);
  const session = new AnnotationSession(client, annotatorId);
  try {
    await session.start();
    await refresh(session, client, app, status);
  } catch (error) {
    app.innerHTML = renderError(error instanceof Error ? error.message : String(error));
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  void bootstrap();
}
