/**
 * DOM-free state machine for one annotator's labeling session.
 *
 * The session owns the review loop: register, pull a task, accept exactly
 * one label for it, advance. The UI layer only renders the current state
 * and forwards button presses to submitLabel().
 */

import { AnnotationLabel, Task, isLabel } from "./api.js";

export interface AnnotationApi {
  registerAnnotator(annotatorId: string): Promise<void>;
  nextTask(annotatorId: string): Promise<Task | null>;
  submitAnnotation(
    videoId: string,
    annotatorId: string,
    label: AnnotationLabel,
  ): Promise<void>;
}

export type SessionState = "idle" | "reviewing" | "done";

export class SessionError extends Error {}

export class AnnotationSession {
  private task: Task | null = null;
  private sessionState: SessionState = "idle";
  private submittedCount = 0;

  constructor(
    private readonly api: AnnotationApi,
    readonly annotatorId: string,
  ) {}

  get state(): SessionState {
    return this.sessionState;
  }

  get currentTask(): Task | null {
    return this.task;
  }

  get submitted(): number {
    return this.submittedCount;
  }

  /** Register with the service and load the first task. */
  async start(): Promise<void> {
    if (this.sessionState !== "idle") {
      throw new SessionError("session already started");
    }
    await this.api.registerAnnotator(this.annotatorId);
    await this.advance();
  }

  /** Submit a label for the task under review, then load the next one. */
  async submitLabel(label: string): Promise<void> {
    if (this.sessionState !== "reviewing" || this.task === null) {
      throw new SessionError("no task under review");
    }
    if (!isLabel(label)) {
      throw new SessionError(`unknown label: ${label}`);
    }
    await this.api.submitAnnotation(this.task.video_id, this.annotatorId, label);
    this.submittedCount += 1;
    await this.advance();
  }

  private async advance(): Promise<void> {
    this.task = await this.api.nextTask(this.annotatorId);
    this.sessionState = this.task === null ? "done" : "reviewing";
  }
}

/** Run a whole session to completion with a fixed labeling policy. */
export async function runSession(
  api: AnnotationApi,
  annotatorId: string,
  choose: (task: Task) => AnnotationLabel,
  maxTasks = 10_000,
): Promise<number> {
  const session = new AnnotationSession(api, annotatorId);
  await session.start();
  while (session.state === "reviewing") {
    if (session.submitted >= maxTasks) {
      throw new SessionError(`exceeded ${maxTasks} tasks without draining`);
    }
    const task = session.currentTask;
    if (task === null) {
      break;
    }
    await session.submitLabel(choose(task));
  }
  return session.submitted;
}
