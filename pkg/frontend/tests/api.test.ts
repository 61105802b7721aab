import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

describe('api client', () => {
  it('retries a failed request at most twice', async () => {
    let calls = 0;
    const client = new ApiClient('http://x', async () => {
      calls++;
      throw new Error('connection refused');
    });
    await expect(client.manifest()).rejects.toThrow('connection refused');
    expect(calls).toBe(3); // initial attempt + 2 retries, never more
  });

  it('succeeds on a retry after a transient failure', async () => {
    let calls = 0;
    const client = new ApiClient('http://x', async () => {
      calls++;
      if (calls === 1) throw new Error('flaky');
      return jsonResponse({ horizon_seconds: 7200 });
    });
    const manifest = await client.manifest();
    expect(manifest.horizon_seconds).toBe(7200);
    expect(calls).toBe(2);
  });

  it('does not retry when the server answered with an error', async () => {
    let calls = 0;
    const client = new ApiClient('http://x', async () => {
      calls++;
      return jsonResponse({ status: 404, code: 'NOT_FOUND', message: 'nope' }, 404);
    });
    await expect(client.jobs()).rejects.toMatchObject({ status: 404, code: 'NOT_FOUND' });
    expect(calls).toBe(1);
  });

  it('builds windowed series queries', async () => {
    const urls: string[] = [];
    const client = new ApiClient('http://x', async (url) => {
      urls.push(url);
      return jsonResponse({ job_id: 'j', metric: 'cpu', series: [], annotations: [], task_color_index: {} });
    });
    await client.jobSeries('j_1', 'cpu', { t_from: 10, t_to: 20 }, 50);
    expect(urls[0]).toBe('http://x/jobs/j_1/series?metric=cpu&from=10&to=20&points=50');
  });

  it('exposes the server error payload', async () => {
    const client = new ApiClient('http://x', async () =>
      jsonResponse({ status: 422, code: 'INVALID_PARAM', message: 'empty window' }, 422));
    const error = await client.layout(5).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.message).toBe('empty window');
  });
});
