/**
 * Typed client for the study service (/api/v1) plus a session uplink that
 * survives lost acknowledgements without duplicating events.
 *
 * The service persists event batches all-or-nothing and `GET
 * /sessions/{token}` reports the authoritative persisted event count, so the
 * uplink can always reconcile after an uncertain request: ask the server how
 * many events landed, drop that many from the head of the local queue, and
 * resend only the remainder.
 */

import { SessionEvent } from "./timeline.js";
import { SubmissionDoc } from "./editor.js";

export const API_PREFIX = "/api/v1";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    message: string,
  ) {
    super(`${errorName} (${status}): ${message}`);
    this.name = "ApiError";
  }
}

export interface TaskDoc {
  snippet_id: string;
  source: string;
  buggy_line: number;
  description: string;
  token_count: number;
  session_minutes: number;
}

export interface RegisterResponse {
  participant_id: string;
  tasks: string[];
}

export interface TaskListResponse {
  participant_id: string;
  tasks: TaskDoc[];
}

export interface OpenSessionResponse {
  token: string;
  participant_id: string;
  snippet_id: string;
}

export interface EventBatchResponse {
  accepted: number;
  total: number;
}

export interface SessionStatusResponse {
  token: string;
  participant_id: string;
  snippet_id: string;
  status: "open" | "closed";
  event_count: number;
  record: Record<string, unknown> | null;
}

export interface SubmitResponse {
  record: Record<string, unknown>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudyClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  health(): Promise<{ status: string; snippets: number }> {
    return this.request("GET", "/health");
  }

  register(participantId: string): Promise<RegisterResponse> {
    return this.request("POST", "/participants", { participant_id: participantId });
  }

  tasks(participantId: string): Promise<TaskListResponse> {
    return this.request("GET", `/tasks/${encodeURIComponent(participantId)}`);
  }

  openSession(participantId: string, snippetId: string): Promise<OpenSessionResponse> {
    return this.request("POST", "/sessions", {
      participant_id: participantId,
      snippet_id: snippetId,
    });
  }

  status(token: string): Promise<SessionStatusResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(token)}`);
  }

  postEvents(token: string, events: SessionEvent[]): Promise<EventBatchResponse> {
    return this.request("POST", `/sessions/${encodeURIComponent(token)}/events`, { events });
  }

  submit(token: string, submission: SubmissionDoc): Promise<SubmitResponse> {
    return this.request("POST", `/sessions/${encodeURIComponent(token)}/submit`, submission);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(this.baseUrl + API_PREFIX + path, init);
    if (!res.ok) {
      throw await toApiError(res);
    }
    return (await res.json()) as T;
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let name = "HttpError";
  let message = `HTTP ${res.status}`;
  try {
    const doc: unknown = await res.json();
    const detail = (doc as { detail?: unknown }).detail;
    if (detail && typeof detail === "object" && !Array.isArray(detail)) {
      const d = detail as { error?: unknown; message?: unknown };
      if (typeof d.error === "string") name = d.error;
      if (typeof d.message === "string") message = d.message;
    } else if (typeof detail === "string") {
      message = detail;
    } else if (detail !== undefined) {
      // pydantic request-validation errors arrive as a list
      name = "ValidationError";
      message = JSON.stringify(detail);
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(res.status, name, message);
}

/**
 * Orders event delivery for one open session. Flushes are serialized, and a
 * batch whose acknowledgement is lost is never blindly resent: the next
 * flush first reconciles against the server's persisted event count and
 * drops whatever already landed, so a dropped ack cannot duplicate events.
 */
export class SessionUplink {
  private pending: SessionEvent[] = [];
  private ackedCount = 0;
  private uncertain = false;
  private chain: Promise<void> = Promise.resolve();

  constructor(
    private readonly client: StudyClient,
    readonly token: string,
  ) {}

  /** events the server has confirmed persisted */
  get acked(): number {
    return this.ackedCount;
  }

  /** events waiting locally */
  get queued(): number {
    return this.pending.length;
  }

  enqueue(ev: SessionEvent): void {
    this.pending.push(ev);
  }

  /** Push everything queued. Safe to call concurrently; batches never interleave. */
  flush(): Promise<void> {
    const next = this.chain.then(() => this.flushNow());
    this.chain = next.catch(() => undefined);
    return next;
  }

  private async flushNow(): Promise<void> {
    while (this.pending.length > 0) {
      if (this.uncertain) {
        // an earlier batch may have landed without us hearing the ack;
        // resending it could duplicate events, so settle the books first
        await this.reconcile();
        this.uncertain = false;
        continue;
      }
      const batch = this.pending.slice();
      try {
        const res = await this.client.postEvents(this.token, batch);
        this.pending.splice(0, batch.length);
        this.ackedCount = res.total;
      } catch (err) {
        if (!(err instanceof ApiError)) {
          this.uncertain = true; // network died mid-request: batch state unknown
        }
        throw err; // an ApiError means the server rejected the batch atomically
      }
    }
  }

  /** Ask the server how many events actually landed and drop that prefix. */
  private async reconcile(): Promise<void> {
    const st = await this.client.status(this.token);
    const landed = st.event_count - this.ackedCount;
    if (landed > 0) {
      this.pending.splice(0, Math.min(landed, this.pending.length));
      this.ackedCount = st.event_count;
    }
  }

  /**
   * Flush the queue, then close the session. A retry that hits 409
   * AlreadyClosed returns the stored record instead of failing, so a lost
   * submit ack is safe to replay.
   */
  async submit(submission: SubmissionDoc): Promise<Record<string, unknown>> {
    await this.flush();
    try {
      const res = await this.client.submit(this.token, submission);
      return res.record;
    } catch (err) {
      if (err instanceof ApiError && err.errorName === "AlreadyClosed") {
        const st = await this.client.status(this.token);
        if (st.record) {
          return st.record;
        }
      }
      throw err;
    }
  }
}
