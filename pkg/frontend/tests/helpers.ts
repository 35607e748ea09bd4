// Fixture loading plus a scripted fake of the engine's REST API.

import { readFileSync } from 'node:fs'
import { join } from 'node:path'

export function fixture<T>(name: string): T {
  // vitest runs with the package root as cwd; jsdom mangles import.meta.url
  const path = join(process.cwd(), 'tests', 'fixtures', `${name}.json`)
  return JSON.parse(readFileSync(path, 'utf-8')) as T
}

export interface RecordedCall {
  method: string
  url: string
  body?: unknown
}

/**
 * Minimal scripted service: answers uploads and jobs, resolves every job's
 * result from the provided artifact table, and records each request so tests
 * can count job submissions.
 */
export class FakeService {
  calls: RecordedCall[] = []
  datasetId = 'ds_fixture01'
  artifacts: Record<string, unknown>
  failUploadWith: { status: number; error: string; message: string } | null = null
  private jobCounter = 0
  private jobKinds = new Map<string, string>()
  private jobParams = new Map<string, string>()
  private keyToJob = new Map<string, string>()
  pendingJobs = new Set<string>()

  constructor(artifacts: Record<string, unknown>) {
    this.artifacts = artifacts
  }

  jobSubmissions(): RecordedCall[] {
    return this.calls.filter((c) => c.method === 'POST' && c.url === '/jobs')
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET'
    const bodyText = typeof init?.body === 'string' ? init.body : undefined
    const call: RecordedCall = { method, url }
    if (bodyText !== undefined) {
      try {
        call.body = JSON.parse(bodyText)
      } catch {
        call.body = bodyText
      }
    }
    this.calls.push(call)

    if (method === 'POST' && url === '/datasets') {
      if (this.failUploadWith) {
        const { status, error, message } = this.failUploadWith
        return jsonResponse(status, { error, message })
      }
      return jsonResponse(201, {
        dataset_id: this.datasetId,
        n_series: 24,
        labeled: true,
        groups: ['ar1', 'noise', 'sine'],
      })
    }

    if (method === 'POST' && url === '/jobs') {
      const payload = call.body as { dataset_id: string; kind: string; params: object }
      const key = `${payload.kind}|${JSON.stringify(payload.params)}`
      let jobId = this.keyToJob.get(key)
      if (!jobId) {
        jobId = `job_${this.jobCounter++}`
        this.keyToJob.set(key, jobId)
        this.jobKinds.set(jobId, payload.kind)
        this.jobParams.set(jobId, JSON.stringify(payload.params))
      }
      const state = this.pendingJobs.has(jobId) ? 'queued' : 'done'
      return jsonResponse(201, { job_id: jobId, kind: payload.kind, state })
    }

    let m = url.match(/^\/jobs\/([\w-]+)\/result$/)
    if (m) {
      const kind = this.jobKinds.get(m[1])
      if (!kind) return jsonResponse(404, { error: 'UnknownJob', message: m[1] })
      if (this.pendingJobs.has(m[1])) {
        return jsonResponse(409, { error: 'JobNotDone', message: 'queued' })
      }
      return jsonResponse(200, this.artifacts[kind])
    }

    m = url.match(/^\/jobs\/([\w-]+)$/)
    if (m) {
      const kind = this.jobKinds.get(m[1])
      if (!kind) return jsonResponse(404, { error: 'UnknownJob', message: m[1] })
      const state = this.pendingJobs.has(m[1]) ? 'running' : 'done'
      return jsonResponse(200, { job_id: m[1], kind, state })
    }

    return jsonResponse(404, { error: 'NotFound', message: url })
  }
}

export function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  })
}

export function csvFile(name = 'data.csv', size = 1024): { name: string; size: number; text: () => Promise<string> } {
  return {
    name,
    size,
    text: async () => 'id,timepoint,values,group\na,0,1.0,g\na,1,2.0,g\n',
  }
}

export async function flush(times = 20): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0))
  }
}
