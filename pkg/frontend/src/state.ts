// ViewState: everything the analyst has chosen. Replaying the same state
// against the same dataset reproduces identical views, because results come
// exclusively from content-addressed artifacts.

import type { ViewName } from './types'

export interface ViewState {
  datasetId: string | null
  activeView: ViewName
  params: {
    normalization: string
    linkage: string
    projectionMethod: 'pca' | 'tsne'
    perplexity: number
    iterations: number
    seed: number
    classifier: string
    folds: number
    bySet: boolean
    nullMethod: 'none' | 'model-free' | 'model-fits'
    permutations: number
    pValueMethod: 'gaussian' | 'empirical'
    numFeatures: number
    test: string
    showCovariance: boolean
  }
  selectedFeature: string | null
  selectedSeries: string | null
  projectionViewBox: string | null
}

export function initialState(): ViewState {
  return {
    datasetId: null,
    activeView: 'quality',
    params: {
      normalization: 'z-score',
      linkage: 'average',
      projectionMethod: 'pca',
      perplexity: 15,
      iterations: 1000,
      seed: 0,
      classifier: 'svm-linear',
      folds: 10,
      bySet: true,
      nullMethod: 'model-free',
      permutations: 1000,
      pValueMethod: 'gaussian',
      numFeatures: 10,
      test: 'one-d-classifier',
      showCovariance: false,
    },
    selectedFeature: null,
    selectedSeries: null,
    projectionViewBox: null,
  }
}

// client-side mirrors of the bounds the API enforces
export const BOUNDS = {
  perplexity: { min: 0.1, max: 10000 },
  folds: { min: 2, max: 1000 },
  permutations: { min: 1, max: 1_000_000 },
  numFeatures: { min: 1, max: 10000 },
  iterations: { min: 1, max: 100000 },
}

export function validateParam(name: keyof typeof BOUNDS, value: number): string | null {
  const bound = BOUNDS[name]
  if (!Number.isFinite(value)) return `${name} must be a number`
  if (value < bound.min || value > bound.max) {
    return `${name} must be between ${bound.min} and ${bound.max}`
  }
  return null
}

/** Map the ViewState onto the wire parameters of one job kind. */
export function jobParams(state: ViewState, view: ViewName): Record<string, unknown> {
  const p = state.params
  switch (view) {
    case 'quality':
      return {}
    case 'matrix':
      return { method: p.normalization, linkage: p.linkage }
    case 'projection':
      return {
        method: p.projectionMethod,
        normalize: p.normalization,
        perplexity: p.perplexity,
        seed: p.seed,
        iterations: p.iterations,
      }
    case 'classify':
      return {
        by_set: p.bySet,
        classifier: p.classifier,
        folds: p.folds,
        seed: p.seed,
        null: p.nullMethod === 'none' ? null : p.nullMethod,
        permutations: p.permutations,
        p_value_method: p.pValueMethod,
      }
    case 'top_features':
      return {
        num_features: p.numFeatures,
        test: p.test,
        folds: p.folds,
        seed: p.seed,
        null: p.nullMethod === 'none' ? 'model-free' : p.nullMethod,
        permutations: p.permutations,
        p_value_method: p.pValueMethod,
      }
  }
}

export const VIEW_TO_KIND: Record<ViewName, string> = {
  quality: 'quality',
  matrix: 'matrix',
  projection: 'project',
  classify: 'classify',
  top_features: 'top_features',
}
