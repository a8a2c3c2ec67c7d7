/**
 * Pure HTML rendering for the review screen.
 *
 * Every function returns a string so the view layer is testable without a
 * browser; main.ts is the only module that touches the document.
 */

import { LABELS, Progress, Task } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** The review card: metadata on the left, one button per label below. */
export function renderTask(task: Task): string {
  const tags = task.tags
    .map((tag) => `<span class="tag">${escapeHtml(tag)}</span>`)
    .join(" ");
  const buttons = LABELS.map((label) => {
    const definition = task.label_definitions[label] ?? "";
    return (
      `<button class="label-button" data-label="${label}" ` +
      `title="${escapeHtml(definition)}">${label}</button>`
    );
  }).join("\n");
  return `
<article class="task" data-video-id="${escapeHtml(task.video_id)}">
  <img class="thumbnail" src="${escapeHtml(task.thumbnail_ref)}" alt="thumbnail">
  <h2>${escapeHtml(task.title)}</h2>
  <p class="tags">${tags}</p>
  <p class="description">${escapeHtml(task.description)}</p>
  <p><a href="${escapeHtml(task.playback_url)}" target="_blank" rel="noopener">watch video</a></p>
  <div class="labels">
${buttons}
  </div>
</article>`.trim();
}

export function renderDone(submitted: number): string {
  return `<p class="done">Queue complete — ${submitted} video(s) labeled. Thank you.</p>`;
}

export function renderProgress(progress: Progress): string {
  return (
    `<p class="progress">${progress.videos_with_3_votes} of ${progress.videos} ` +
    `videos fully voted · ${progress.events} submissions</p>`
  );
}

export function renderError(message: string): string {
  return `<p class="error">${escapeHtml(message)}</p>`;
}
