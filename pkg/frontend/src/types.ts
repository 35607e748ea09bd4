// Artifact payload shapes, mirroring the service JSON wire formats.
// The UI never computes statistics itself: everything rendered comes from
// one of these payloads.

export interface QualityRow {
  name: string
  set: string
  numeric: number
  nan: number
  pos_inf: number
  neg_inf: number
}

export interface QualityArtifact {
  features: QualityRow[]
}

export interface MatrixArtifact {
  values: number[][]
  row_ids: string[]
  col_names: string[]
  row_order: number[]
  col_order: number[]
  merges_rows: number[][]
  merges_cols: number[][]
  dropped?: { nonfinite: string[]; degenerate: string[] }
}

export interface EllipseSpec {
  group: string
  mean: [number, number]
  cov: [[number, number], [number, number]]
  n: number
}

export interface EmbeddingArtifact {
  method: string
  coords: [number, number][]
  ids: string[]
  groups: string[] | null
  variance_explained?: [number, number]
  ellipses?: EllipseSpec[]
}

export interface ClassifyRow {
  set: string
  mean: number
  sd: number
  feature_count: number
  fold_statistics: number[]
  p_value?: number
  p_value_adjusted?: number
  p_value_method?: string
}

export interface ClassificationArtifact {
  statistic: string
  rows: ClassifyRow[]
  null?: { method: string; num_permutations: number; seed: number; mean: number; sd: number }
}

export interface TopFeatureRow {
  feature: string
  set: string
  statistic: number
  p_value: number
  adjusted_p: number
}

export interface ViolinClass {
  group: string
  points: number[]
  density_x: number[]
  density_y: number[]
}

export interface TopFeaturesArtifact {
  test: string
  rows: TopFeatureRow[]
  correlation: {
    names: string[]
    values: number[][]
    order: number[]
    merges: number[][]
    kind: string
    absolute: boolean
  }
  violins: { feature: string; classes: ViolinClass[] }[]
}

export interface DatasetMeta {
  dataset_id: string
  n_series: number
  labeled: boolean
  groups: string[]
}

export interface JobInfo {
  job_id: string
  dataset_id: string
  kind: string
  params: Record<string, unknown>
  state: 'queued' | 'running' | 'done' | 'failed'
  error?: string
  message?: string
}

export type ViewName = 'quality' | 'matrix' | 'projection' | 'classify' | 'top_features'
