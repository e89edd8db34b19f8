/** Typed client for the speakerkit HTTP API. Every request the UI makes
 * goes through this module, so the surface below is exactly the contract. */

export interface SetupInfo {
  setup_id: string;
  title: string;
  description: string;
  preprocessing: string;
  si: { enabled: boolean; speaker_set_id: string | null; open_set: boolean; threshold: number };
  asr: { engine_id: string; language: string | null };
}

export interface Job {
  job_id: string;
  media_id: string;
  setup_id: string;
  state: "SUBMITTED" | "QUEUED" | "RUNNING" | "COMPLETED" | "FAILED";
  submitted_at: number;
  started_at: number | null;
  finished_at: number | null;
  rtf: number | null;
  error: string | null;
}

export interface Segment {
  start_s: number;
  end_s: number;
  speaker: string;
  text: string;
}

export interface TranscriptDoc {
  media_id: string;
  duration_s: number;
  setup_id: string;
  revision: number;
  segments: Segment[];
}

export interface Edit {
  segment_index: number;
  expected_revision: number;
  new_text?: string;
  new_label?: string;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

/** A PATCH lost the optimistic-concurrency race; refetch and retry. */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, "revision_conflict", message);
  }
}

async function fail(res: Response): Promise<never> {
  let code = "internal";
  let message = res.statusText;
  try {
    const body = await res.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    /* non-JSON error body */
  }
  if (res.status === 409 && code === "revision_conflict") throw new ConflictError(message);
  throw new ApiError(res.status, code, message);
}

export class ApiClient {
  /** one in-flight PATCH per document, enforced client-side */
  private editing = new Set<string>();

  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) return fail(res);
    return res.json();
  }

  listSetups(): Promise<SetupInfo[]> {
    return this.get("/api/setups");
  }

  async submitJob(file: Blob, filename: string, setupId: string): Promise<string> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("setup_id", setupId);
    const res = await fetch(this.base + "/api/jobs", { method: "POST", body: form });
    if (!res.ok) return fail(res);
    const body = await res.json();
    return body.job_id;
  }

  listJobs(): Promise<Job[]> {
    return this.get("/api/jobs");
  }

  getJob(jobId: string): Promise<Job> {
    return this.get(`/api/jobs/${jobId}`);
  }

  getResult(jobId: string): Promise<TranscriptDoc> {
    return this.get(`/api/jobs/${jobId}/result`);
  }

  async applyEdit(jobId: string, edit: Edit): Promise<TranscriptDoc> {
    if (this.editing.has(jobId)) {
      throw new ApiError(0, "busy", "an edit for this document is already in flight");
    }
    this.editing.add(jobId);
    try {
      const res = await fetch(this.base + `/api/jobs/${jobId}/result`, {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(edit),
      });
      if (!res.ok) return fail(res);
      return res.json();
    } finally {
      this.editing.delete(jobId);
    }
  }

  /** SRT export bytes, via the same endpoint the download button uses. */
  async fetchExport(jobId: string): Promise<Uint8Array> {
    const res = await fetch(this.base + this.exportPath(jobId));
    if (!res.ok) return fail(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  exportPath(jobId: string): string {
    return `/api/jobs/${jobId}/export?format=srt`;
  }

  mediaPath(jobId: string): string {
    return `/api/jobs/${jobId}/media`;
  }
}
