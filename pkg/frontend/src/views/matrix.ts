// Clustered series x feature heatmap. Rows and columns are drawn in the
// dendrogram leaf orders carried by the artifact; hovering a cell reveals
// (series id, feature, value).

import { clear, el, svgEl, fmt } from '../dom'
import { seqColor } from '../colors'
import type { MatrixArtifact } from '../types'

export interface MatrixOptions {
  cellSize?: number
  onCellClick?: (seriesId: string, feature: string) => void
}

export function renderMatrix(
  container: HTMLElement,
  artifact: MatrixArtifact,
  options: MatrixOptions = {},
): void {
  clear(container)
  const cell = options.cellSize ?? Math.max(4, Math.min(18, 560 / artifact.col_names.length))
  const rows = artifact.row_order
  const cols = artifact.col_order
  const width = cols.length * cell
  const height = rows.length * cell

  const svg = svgEl('svg', {
    class: 'matrix-heatmap',
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    role: 'img',
  })

  rows.forEach((rowIdx, r) => {
    cols.forEach((colIdx, c) => {
      const value = artifact.values[rowIdx][colIdx]
      const rect = svgEl('rect', {
        x: String(c * cell),
        y: String(r * cell),
        width: String(cell),
        height: String(cell),
        fill: seqColor(value),
        'data-row-id': artifact.row_ids[rowIdx],
        'data-col-name': artifact.col_names[colIdx],
        'data-row-index': String(rowIdx),
        'data-col-index': String(colIdx),
      })
      const title = svgEl('title')
      title.textContent = `${artifact.row_ids[rowIdx]} / ${artifact.col_names[colIdx]}: ${fmt(value)}`
      rect.append(title)
      if (options.onCellClick) {
        rect.addEventListener('click', () =>
          options.onCellClick!(artifact.row_ids[rowIdx], artifact.col_names[colIdx]),
        )
      }
      svg.append(rect)
    })
  })

  const dropped = artifact.dropped
  const note =
    dropped && dropped.nonfinite.length + dropped.degenerate.length > 0
      ? `${dropped.nonfinite.length} non-finite and ${dropped.degenerate.length} degenerate features dropped`
      : ''
  container.append(
    el('div', { class: 'matrix-view' }, [
      el('div', { class: 'matrix-meta' }, [
        `${artifact.row_ids.length} series x ${artifact.col_names.length} features`,
        note ? el('span', { class: 'drop-note' }, [` — ${note}`]) : '',
      ]),
      svg,
    ]),
  )
}
