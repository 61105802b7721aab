import type {
  AggregateSeries,
  LayoutTree,
  LinksPayload,
  JobSummary,
  Manifest,
  Metric,
  SeriesBundle,
  TimeWindow,
} from './types.js';

// Read-only client. Every call is a GET; a failed request is retried at
// most twice (3 attempts total) and an abort is never retried.
const MAX_RETRIES = 2;

export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string, signal?: AbortSignal): Promise<T> {
    let lastError: unknown = null;
    for (let attempt = 0; attempt <= MAX_RETRIES; attempt++) {
      try {
        const response = await this.fetchImpl(this.baseUrl + path, { signal });
        if (!response.ok) {
          const body = await response.json().catch(() => ({}));
          throw new ApiError(
            response.status,
            (body as { code?: string }).code ?? 'HTTP_ERROR',
            (body as { message?: string }).message ?? `GET ${path} -> ${response.status}`,
          );
        }
        return (await response.json()) as T;
      } catch (err) {
        if (err instanceof ApiError) throw err; // the server answered; don't retry
        if (signal?.aborted) throw err;
        lastError = err;
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }

  manifest(signal?: AbortSignal): Promise<Manifest> {
    return this.getJson('/manifest', signal);
  }

  jobs(signal?: AbortSignal): Promise<JobSummary[]> {
    return this.getJson('/jobs', signal);
  }

  layout(t: number, signal?: AbortSignal): Promise<LayoutTree> {
    return this.getJson(`/layout?t=${t}`, signal);
  }

  links(t: number, signal?: AbortSignal): Promise<LinksPayload> {
    return this.getJson(`/links?t=${t}`, signal);
  }

  timeline(metric: Metric, resolution: number, signal?: AbortSignal): Promise<AggregateSeries> {
    return this.getJson(`/timeline?metric=${metric}&resolution=${resolution}`, signal);
  }

  jobSeries(
    jobId: string,
    metric: Metric,
    window?: TimeWindow,
    points?: number,
    signal?: AbortSignal,
  ): Promise<SeriesBundle> {
    const params = new URLSearchParams({ metric });
    if (window) {
      params.set('from', String(window.t_from));
      params.set('to', String(window.t_to));
    }
    if (points !== undefined) params.set('points', String(points));
    return this.getJson(`/jobs/${encodeURIComponent(jobId)}/series?${params}`, signal);
  }
}
