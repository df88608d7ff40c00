/** Thin typed client over the annotation service; fetch is injectable for tests. */

import type {
  ConsensusLabel,
  DisagreementRow,
  LabelSubmission,
  ProblemDetail,
  SessionStats,
  SessionSummary,
  TaskView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Server said no: carries the problem-detail body and HTTP status. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function parseProblem(response: Response): Promise<ApiError> {
  let code = "http-error";
  let detail = `${response.status}`;
  try {
    const body = (await response.json()) as ProblemDetail;
    if (body && body.error) {
      code = body.error;
      detail = body.detail ?? detail;
    }
  } catch {
    // not a problem-detail body; keep the status text
  }
  return new ApiError(response.status, code, detail);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      throw await parseProblem(response);
    }
    return (await response.json()) as T;
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/api/sessions");
  }

  createSession(sampleId: string, annotators: string[], seed = 0): Promise<SessionSummary> {
    return this.request("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sample_id: sampleId, annotators, seed }),
    });
  }

  fetchTasks(sessionId: string, annotatorId: string, limit: number): Promise<TaskView[]> {
    const params = new URLSearchParams({ annotator: annotatorId, limit: String(limit) });
    return this.request(`/api/sessions/${sessionId}/tasks?${params}`);
  }

  submitLabel(sessionId: string, label: LabelSubmission): Promise<{ status: string }> {
    return this.request(`/api/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(label),
    });
  }

  stats(sessionId: string): Promise<SessionStats> {
    return this.request(`/api/sessions/${sessionId}/stats`);
  }

  disagreements(sessionId: string): Promise<DisagreementRow[]> {
    return this.request(`/api/sessions/${sessionId}/disagreements`, {
      headers: { "x-role": "adjudicator" },
    });
  }

  adjudicate(
    sessionId: string,
    matchId: string,
    consensus: ConsensusLabel,
    adjudicatorId: string,
  ): Promise<{ status: string }> {
    return this.request(`/api/sessions/${sessionId}/adjudicate`, {
      method: "POST",
      headers: { "content-type": "application/json", "x-role": "adjudicator" },
      body: JSON.stringify({
        match_id: matchId,
        consensus,
        adjudicator_id: adjudicatorId,
      }),
    });
  }
}
