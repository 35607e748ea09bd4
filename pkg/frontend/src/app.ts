// Application shell: drag-and-drop upload, parameter sidebar, view switching.
//
// Invariants the tests pin down:
//  - a parameter change submits exactly one new job (results are cached by
//    (kind, params), so replaying a ViewState re-renders without refetching);
//  - responses are token-guarded, so a stale job can never overwrite a newer
//    view;
//  - the covariance-ellipse toggle re-renders from the cached artifact and
//    never touches the network.

import { ApiClient, ApiError, MAX_UPLOAD_BYTES, type FetchLike } from './api'
import { clear, el } from './dom'
import { initialState, jobParams, validateParam, VIEW_TO_KIND, type ViewState, BOUNDS } from './state'
import type {
  ClassificationArtifact,
  EmbeddingArtifact,
  MatrixArtifact,
  QualityArtifact,
  TopFeaturesArtifact,
  ViewName,
} from './types'
import { renderClassify } from './views/classify'
import { renderMatrix } from './views/matrix'
import { renderProjection } from './views/projection'
import { renderQuality } from './views/quality'
import { renderTopFeatures } from './views/topFeatures'

const VIEWS: { name: ViewName; label: string }[] = [
  { name: 'quality', label: 'Quality' },
  { name: 'matrix', label: 'Matrix' },
  { name: 'projection', label: 'Projection' },
  { name: 'classify', label: 'Classify' },
  { name: 'top_features', label: 'Top features' },
]

export interface AppOptions {
  pollMs?: number
  maxUploadBytes?: number
}

export class App {
  readonly state: ViewState = initialState()
  readonly api: ApiClient
  private readonly artifactCache = new Map<string, unknown>()
  private readonly pollMs: number
  private readonly maxUpload: number
  private requestToken = 0
  private latestToken = new Map<ViewName, number>()
  private sortBy: 'p_value' | 'statistic' | 'feature' = 'p_value'

  private viewArea!: HTMLElement
  private errorPanel!: HTMLElement
  private statusLine!: HTMLElement
  private downloadLink!: HTMLAnchorElement

  constructor(
    private readonly root: HTMLElement,
    fetchFn: FetchLike,
    options: AppOptions = {},
  ) {
    this.api = new ApiClient(fetchFn)
    this.pollMs = options.pollMs ?? 150
    this.maxUpload = options.maxUploadBytes ?? MAX_UPLOAD_BYTES
  }

  mount(): void {
    clear(this.root)
    const dropZone = el('div', { class: 'drop-zone' }, [
      'Drop a long-format CSV here (id,timepoint,values[,group]) or ',
    ])
    const fileInput = el('input', { type: 'file', accept: '.csv,text/csv' })
    fileInput.addEventListener('change', () => {
      const file = (fileInput as HTMLInputElement).files?.[0]
      if (file) void this.handleUpload(file)
    })
    dropZone.append(fileInput)
    dropZone.addEventListener('dragover', (ev) => ev.preventDefault())
    dropZone.addEventListener('drop', (ev) => {
      ev.preventDefault()
      const file = (ev as DragEvent).dataTransfer?.files?.[0]
      if (file) void this.handleUpload(file)
    })

    this.statusLine = el('div', { class: 'status-line' }, ['no dataset uploaded'])
    this.errorPanel = el('div', { class: 'error-panel', hidden: 'hidden' })
    this.downloadLink = el('a', { class: 'download-features', hidden: 'hidden' }, [
      'download features.csv',
    ]) as HTMLAnchorElement

    const tabs = el('nav', { class: 'view-tabs' })
    for (const view of VIEWS) {
      const button = el('button', { class: 'view-tab', 'data-view': view.name }, [view.label])
      button.addEventListener('click', () => void this.setView(view.name))
      tabs.append(button)
    }

    this.viewArea = el('main', { class: 'view-area' }, [
      el('div', { class: 'placeholder' }, ['upload a dataset to begin']),
    ])

    this.root.append(
      el('div', { class: 'app-shell' }, [
        el('aside', { class: 'sidebar' }, [dropZone, this.statusLine, this.downloadLink, this.buildParamForm()]),
        el('section', { class: 'content' }, [tabs, this.errorPanel, this.viewArea]),
      ]),
    )
  }

  private buildParamForm(): HTMLElement {
    const p = this.state.params
    const form = el('form', { class: 'param-form' })
    form.addEventListener('submit', (ev) => ev.preventDefault())

    const select = (name: string, label: string, choices: string[], current: string) => {
      const node = el('select', { name, 'data-param': name })
      for (const choice of choices) {
        const opt = el('option', { value: choice }, [choice])
        if (choice === current) opt.setAttribute('selected', 'selected')
        node.append(opt)
      }
      node.addEventListener('change', () => void this.setParam(name, (node as HTMLSelectElement).value))
      return el('label', { class: 'param' }, [label, node])
    }
    const number = (name: string, label: string, current: number, step = '1') => {
      const node = el('input', { type: 'number', name, step, value: String(current), 'data-param': name })
      node.addEventListener('change', () =>
        void this.setParam(name, Number((node as HTMLInputElement).value)),
      )
      return el('label', { class: 'param' }, [label, node])
    }
    const checkbox = (name: string, label: string, current: boolean) => {
      const node = el('input', { type: 'checkbox', name, 'data-param': name })
      if (current) node.setAttribute('checked', 'checked')
      node.addEventListener('change', () =>
        void this.setParam(name, (node as HTMLInputElement).checked),
      )
      return el('label', { class: 'param param-toggle' }, [node, label])
    }

    form.append(
      select('normalization', 'normalization', ['z-score', 'MinMax', 'Sigmoid', 'RobustSigmoid'], p.normalization),
      select('linkage', 'linkage', ['average', 'single', 'complete'], p.linkage),
      select('projectionMethod', 'projection', ['pca', 'tsne'], p.projectionMethod),
      number('perplexity', 'perplexity', p.perplexity, '0.5'),
      number('seed', 'seed', p.seed),
      select('classifier', 'classifier', ['svm-linear', 'binomial-logistic'], p.classifier),
      number('folds', 'folds', p.folds),
      select('nullMethod', 'null model', ['none', 'model-free', 'model-fits'], p.nullMethod),
      number('permutations', 'permutations', p.permutations),
      select('pValueMethod', 'p-value', ['gaussian', 'empirical'], p.pValueMethod),
      number('numFeatures', 'top features', p.numFeatures),
      select('test', 'feature test', ['one-d-classifier', 't-test', 'wilcoxon', 'binomial-logistic'], p.test),
      checkbox('showCovariance', 'covariance ellipses', p.showCovariance),
    )
    return form
  }

  // -- upload flow ------------------------------------------------------------

  async handleUpload(file: { name: string; size?: number; text: () => Promise<string> }): Promise<void> {
    this.hideError()
    if (file.size !== undefined && file.size > this.maxUpload) {
      this.showError(
        'UploadTooLarge',
        `${file.name} is ${(file.size / 1024 / 1024).toFixed(0)} MB; the service cap is ` +
          `${(this.maxUpload / 1024 / 1024).toFixed(0)} MB`,
      )
      return
    }
    this.statusLine.textContent = `uploading ${file.name}…`
    try {
      const meta = await this.api.uploadDataset(file)
      this.state.datasetId = meta.dataset_id
      this.artifactCache.clear()
      this.statusLine.textContent =
        `${meta.dataset_id}: ${meta.n_series} series` +
        (meta.labeled ? `, groups: ${meta.groups.join(', ')}` : ', unlabeled')
      this.downloadLink.href = this.api.featuresCsvUrl(meta.dataset_id)
      this.downloadLink.removeAttribute('hidden')
      await this.refreshActiveView()
    } catch (err) {
      this.statusLine.textContent = 'upload failed'
      this.showApiError(err)
    }
  }

  // -- parameters and views ------------------------------------------------------

  async setParam(name: string, value: unknown): Promise<void> {
    const params = this.state.params as unknown as Record<string, unknown>
    if (!(name in params)) return
    if (name in BOUNDS) {
      const problem = validateParam(name as keyof typeof BOUNDS, Number(value))
      if (problem) {
        this.showError('InvalidParameter', problem)
        return
      }
    }
    this.hideError()
    params[name] = value
    if (name === 'showCovariance') {
      // render-only option: redraw the cached embedding, never refetch
      this.renderCached('projection')
      return
    }
    await this.refreshActiveView()
  }

  async setView(view: ViewName): Promise<void> {
    this.state.activeView = view
    await this.refreshActiveView()
  }

  private cacheKey(view: ViewName): string {
    return `${this.state.datasetId}|${VIEW_TO_KIND[view]}|${JSON.stringify(jobParams(this.state, view))}`
  }

  async refreshActiveView(): Promise<void> {
    const view = this.state.activeView
    if (!this.state.datasetId) return
    const key = this.cacheKey(view)
    const cached = this.artifactCache.get(key)
    if (cached !== undefined) {
      this.renderArtifact(view, cached)
      return
    }
    const token = ++this.requestToken
    this.latestToken.set(view, token)
    this.renderLoading(view)
    try {
      const { artifact } = await this.api.runJob<unknown>(
        this.state.datasetId,
        VIEW_TO_KIND[view],
        jobParams(this.state, view),
        this.pollMs,
      )
      if (this.latestToken.get(view) !== token) return // stale; a newer request won
      this.artifactCache.set(key, artifact)
      this.renderArtifact(view, artifact)
    } catch (err) {
      if (this.latestToken.get(view) !== token) return
      this.showApiError(err)
    }
  }

  private renderCached(view: ViewName): void {
    if (this.state.activeView !== view) return
    const cached = this.artifactCache.get(this.cacheKey(view))
    if (cached !== undefined) this.renderArtifact(view, cached)
  }

  private renderLoading(view: ViewName): void {
    clear(this.viewArea)
    this.viewArea.append(el('div', { class: 'loading', 'data-view': view }, [`running ${view}…`]))
  }

  renderArtifact(view: ViewName, artifact: unknown): void {
    clear(this.viewArea)
    const panel = el('div', { class: `view-panel view-${view}`, 'data-view': view })
    this.viewArea.append(panel)
    switch (view) {
      case 'quality':
        renderQuality(panel, artifact as QualityArtifact)
        break
      case 'matrix':
        renderMatrix(panel, artifact as MatrixArtifact, {
          onCellClick: (seriesId, feature) => {
            this.state.selectedSeries = seriesId
            this.state.selectedFeature = feature
          },
        })
        break
      case 'projection':
        renderProjection(panel, artifact as EmbeddingArtifact, {
          showCovariance: this.state.params.showCovariance,
          viewBox: this.state.projectionViewBox,
          onViewBoxChange: (viewBox) => {
            this.state.projectionViewBox = viewBox
          },
          onPointClick: (seriesId) => {
            this.state.selectedSeries = seriesId
          },
        })
        break
      case 'classify':
        renderClassify(panel, artifact as ClassificationArtifact)
        break
      case 'top_features':
        renderTopFeatures(panel, artifact as TopFeaturesArtifact, {
          sortBy: this.sortBy,
          onSortChange: (key) => {
            this.sortBy = key
            this.renderCached('top_features')
          },
        })
        break
    }
  }

  // -- errors ---------------------------------------------------------------------

  private showApiError(err: unknown): void {
    if (err instanceof ApiError) {
      this.showError(err.errorName, err.message)
    } else {
      this.showError('Error', String(err))
    }
  }

  private showError(name: string, message: string): void {
    this.errorPanel.removeAttribute('hidden')
    clear(this.errorPanel)
    this.errorPanel.append(
      el('strong', {}, [name]),
      el('span', { class: 'error-message' }, [` ${message}`]),
    )
  }

  private hideError(): void {
    this.errorPanel.setAttribute('hidden', 'hidden')
    clear(this.errorPanel)
  }
}
