// Thin client over the engine's REST API. The fetch function is injected so
// tests can observe and fake network traffic.

import type { DatasetMeta, JobInfo } from './types'

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

// mirror of the service default; the client warns before wasting an upload
export const MAX_UPLOAD_BYTES = 256 * 1024 * 1024

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    message: string,
  ) {
    super(message)
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let name = 'HttpError'
  let message = `${resp.status}`
  try {
    const body = (await resp.json()) as { error?: string; message?: string }
    if (body.error) name = body.error
    if (body.message) message = body.message
  } catch {
    /* non-JSON error body; keep the status text */
  }
  return new ApiError(resp.status, name, message)
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = '',
  ) {}

  async uploadDataset(file: { name: string; text: () => Promise<string> }): Promise<DatasetMeta> {
    const text = await file.text()
    const resp = await this.fetchFn(`${this.base}/datasets`, {
      method: 'POST',
      headers: { 'Content-Type': 'text/csv' },
      body: text,
    })
    if (!resp.ok) throw await parseError(resp)
    return (await resp.json()) as DatasetMeta
  }

  async submitJob(datasetId: string, kind: string, params: Record<string, unknown>): Promise<JobInfo> {
    const resp = await this.fetchFn(`${this.base}/jobs`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ dataset_id: datasetId, kind, params }),
    })
    if (!resp.ok) throw await parseError(resp)
    return (await resp.json()) as JobInfo
  }

  async jobState(jobId: string): Promise<JobInfo> {
    const resp = await this.fetchFn(`${this.base}/jobs/${jobId}`)
    if (!resp.ok) throw await parseError(resp)
    return (await resp.json()) as JobInfo
  }

  async jobResult<T>(jobId: string): Promise<T> {
    const resp = await this.fetchFn(`${this.base}/jobs/${jobId}/result`)
    if (!resp.ok) throw await parseError(resp)
    return (await resp.json()) as T
  }

  /** Submit, poll to completion, fetch the artifact. */
  async runJob<T>(
    datasetId: string,
    kind: string,
    params: Record<string, unknown>,
    pollMs = 150,
  ): Promise<{ jobId: string; artifact: T }> {
    const job = await this.submitJob(datasetId, kind, params)
    let state = job.state
    while (state === 'queued' || state === 'running') {
      await new Promise((resolve) => setTimeout(resolve, pollMs))
      state = (await this.jobState(job.job_id)).state
    }
    if (state === 'failed') {
      const info = await this.jobState(job.job_id)
      throw new ApiError(422, info.error ?? 'JobFailed', info.message ?? 'job failed')
    }
    return { jobId: job.job_id, artifact: await this.jobResult<T>(job.job_id) }
  }

  featuresCsvUrl(datasetId: string): string {
    return `${this.base}/datasets/${datasetId}/features.csv`
  }
}
