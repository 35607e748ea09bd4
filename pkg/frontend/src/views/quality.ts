// Extraction-quality view: one stacked proportion bar per feature.

import { el, clear, fmt } from '../dom'
import type { QualityArtifact } from '../types'

const SEGMENTS: { key: 'numeric' | 'nan' | 'pos_inf' | 'neg_inf'; color: string; label: string }[] = [
  { key: 'numeric', color: '#0072B2', label: 'numeric' },
  { key: 'nan', color: '#D55E00', label: 'NaN' },
  { key: 'pos_inf', color: '#E69F00', label: '+Inf' },
  { key: 'neg_inf', color: '#CC79A7', label: '-Inf' },
]

export function renderQuality(container: HTMLElement, artifact: QualityArtifact): void {
  clear(container)
  const root = el('div', { class: 'quality-view' })
  const legend = el('div', { class: 'legend' })
  for (const seg of SEGMENTS) {
    legend.append(
      el('span', { class: 'legend-item' }, [
        el('span', { class: 'swatch', style: `background:${seg.color}` }),
        seg.label,
      ]),
    )
  }
  root.append(legend)

  for (const row of artifact.features) {
    const bar = el('div', { class: 'quality-bar', 'data-feature': row.name })
    for (const seg of SEGMENTS) {
      const width = row[seg.key] * 100
      if (width <= 0) continue
      bar.append(
        el('span', {
          class: `segment segment-${seg.key}`,
          style: `width:${width}%;background:${seg.color}`,
          title: `${row.name}: ${fmt(row[seg.key] * 100, 1)}% ${seg.label}`,
        }),
      )
    }
    root.append(
      el('div', { class: 'quality-row' }, [
        el('span', { class: 'feature-name' }, [`${row.name} (${row.set})`]),
        bar,
      ]),
    )
  }
  container.append(root)
}
