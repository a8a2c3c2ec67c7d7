/**
 * Typed HTTP client for the annotation service.
 *
 * The service exposes five endpoints and this module talks to nothing else:
 *   POST /annotators      register an annotator
 *   GET  /tasks/next      fetch the next video to review (204 when done)
 *   POST /annotations     submit one label
 *   GET  /progress        per-annotator and overall counts
 *   GET  /export          aggregated ground truth as JSON lines
 */

export const LABELS = ["suitable", "disturbing", "restricted", "irrelevant"] as const;
export type AnnotationLabel = (typeof LABELS)[number];

export function isLabel(value: string): value is AnnotationLabel {
  return (LABELS as readonly string[]).includes(value);
}

export interface Task {
  video_id: string;
  title: string;
  thumbnail_ref: string;
  tags: string[];
  description: string;
  playback_url: string;
  label_definitions: Record<string, string>;
}

export interface Progress {
  videos: number;
  annotators: string[];
  votes_per_annotator: Record<string, number>;
  videos_with_3_votes: number;
  events: number;
}

export interface GroundTruthEntry {
  video_id: string;
  rater_labels: string[];
  final: string;
}

export interface ExportResult {
  entries: GroundTruthEntry[];
  excludedCount: number;
}

/** Raised for any non-success HTTP status, carrying the status code. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  async registerAnnotator(annotatorId: string): Promise<void> {
    await this.request("POST", "/annotators", { annotator_id: annotatorId });
  }

  /** Next video for this annotator, or null when their queue is drained. */
  async nextTask(annotatorId: string): Promise<Task | null> {
    const response = await this.request(
      "GET",
      `/tasks/next?annotator=${encodeURIComponent(annotatorId)}`,
    );
    if (response.status === 204) {
      return null;
    }
    return (await response.json()) as Task;
  }

  async submitAnnotation(
    videoId: string,
    annotatorId: string,
    label: AnnotationLabel,
  ): Promise<void> {
    await this.request("POST", "/annotations", {
      video_id: videoId,
      annotator_id: annotatorId,
      label,
    });
  }

  async getProgress(): Promise<Progress> {
    const response = await this.request("GET", "/progress");
    return (await response.json()) as Progress;
  }

  /** Parse the JSON-lines export plus the X-Excluded-Count header. */
  async exportGroundTruth(): Promise<ExportResult> {
    const response = await this.request("GET", "/export");
    const text = await response.text();
    const entries = text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as GroundTruthEntry);
    const excludedCount = Number(response.headers.get("X-Excluded-Count") ?? "0");
    return { entries, excludedCount };
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) {
          detail = parsed.detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, `${method} ${path}: ${detail}`);
    }
    return response;
  }
}
