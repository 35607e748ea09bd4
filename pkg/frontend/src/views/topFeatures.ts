// Top-feature discovery: sortable results table, clustered |rho| matrix of
// the winners, and violin small multiples (per-class densities with raw
// points). All numbers come straight from the artifact.

import { clear, el, svgEl, fmt } from '../dom'
import { groupPalette, seqColor } from '../colors'
import type { TopFeaturesArtifact } from '../types'

type SortKey = 'p_value' | 'statistic' | 'feature'

export interface TopFeaturesOptions {
  sortBy?: SortKey
  onSortChange?: (key: SortKey) => void
}

export function renderTopFeatures(
  container: HTMLElement,
  artifact: TopFeaturesArtifact,
  options: TopFeaturesOptions = {},
): void {
  clear(container)
  const sortBy = options.sortBy ?? 'p_value'
  const rows = [...artifact.rows].sort((a, b) => {
    if (sortBy === 'feature') return a.feature.localeCompare(b.feature)
    if (sortBy === 'statistic') return b.statistic - a.statistic
    return a.p_value - b.p_value || b.statistic - a.statistic
  })

  const head = el('tr', {}, [])
  const columns: [SortKey | null, string][] = [
    ['feature', 'feature'],
    [null, 'set'],
    ['statistic', 'statistic'],
    ['p_value', 'p-value'],
    [null, 'adjusted p'],
  ]
  for (const [key, label] of columns) {
    const th = el('th', key ? { class: 'sortable', 'data-sort': key } : {}, [
      label + (key === sortBy ? ' ▾' : ''),
    ])
    if (key && options.onSortChange) {
      th.addEventListener('click', () => options.onSortChange!(key))
    }
    head.append(th)
  }

  const body = rows.map((r) =>
    el('tr', { 'data-feature': r.feature }, [
      el('td', {}, [r.feature]),
      el('td', {}, [r.set]),
      el('td', {}, [fmt(r.statistic)]),
      el('td', {}, [fmt(r.p_value, 4)]),
      el('td', {}, [fmt(r.adjusted_p, 4)]),
    ]),
  )
  const table = el('table', { class: 'top-feature-table' }, [
    el('thead', {}, [head]),
    el('tbody', {}, body),
  ])

  container.append(
    el('div', { class: 'top-features-view' }, [
      el('h3', {}, [`top features by ${artifact.test}`]),
      table,
      renderCorrelation(artifact),
      renderViolins(artifact),
    ]),
  )
}

function renderCorrelation(artifact: TopFeaturesArtifact): HTMLElement {
  const corr = artifact.correlation
  const cell = Math.max(10, Math.min(26, 360 / Math.max(corr.names.length, 1)))
  const size = corr.order.length * cell
  const svg = svgEl('svg', {
    class: 'correlation-heatmap',
    viewBox: `0 0 ${size} ${size}`,
    width: String(size),
    height: String(size),
  })
  corr.order.forEach((i, r) => {
    corr.order.forEach((j, c) => {
      const rect = svgEl('rect', {
        x: String(c * cell),
        y: String(r * cell),
        width: String(cell),
        height: String(cell),
        fill: seqColor(corr.values[i][j]),
        'data-row-name': corr.names[i],
        'data-col-name': corr.names[j],
      })
      const title = svgEl('title')
      title.textContent = `${corr.names[i]} vs ${corr.names[j]}: ${fmt(corr.values[i][j])}`
      rect.append(title)
      svg.append(rect)
    })
  })
  const labels = el('div', { class: 'correlation-labels' },
    corr.order.map((i) => el('span', { class: 'corr-label' }, [corr.names[i]])))
  return el('div', { class: 'correlation-view' }, [
    el('h4', {}, [`${corr.absolute ? '|' : ''}${corr.kind}${corr.absolute ? '|' : ''} between winners`]),
    svg,
    labels,
  ])
}

function renderViolins(artifact: TopFeaturesArtifact): HTMLElement {
  const wrap = el('div', { class: 'violins-view' }, [el('h4', {}, ['class distributions'])])
  const panelW = 180
  const panelH = 130
  for (const violin of artifact.violins) {
    const groups = violin.classes.map((c) => c.group)
    const palette = groupPalette(groups)
    const lo = Math.min(...violin.classes.map((c) => Math.min(...c.density_x)))
    const hi = Math.max(...violin.classes.map((c) => Math.max(...c.density_x)))
    const span = hi - lo || 1
    const maxDensity = Math.max(...violin.classes.map((c) => Math.max(...c.density_y))) || 1
    const lane = panelW / violin.classes.length

    const svg = svgEl('svg', {
      class: 'violin-panel',
      viewBox: `0 0 ${panelW} ${panelH + 16}`,
      width: String(panelW),
      height: String(panelH + 16),
      'data-feature': violin.feature,
    })
    violin.classes.forEach((cls, ci) => {
      const cx = lane * (ci + 0.5)
      const color = palette.get(cls.group)!
      const right = cls.density_x.map((v, k) => {
        const x = cx + (cls.density_y[k] / maxDensity) * lane * 0.4
        const y = panelH * (1 - (v - lo) / span)
        return `${x},${y}`
      })
      const left = cls.density_x
        .map((v, k) => {
          const x = cx - (cls.density_y[k] / maxDensity) * lane * 0.4
          const y = panelH * (1 - (v - lo) / span)
          return `${x},${y}`
        })
        .reverse()
      svg.append(
        svgEl('polygon', {
          class: 'violin-shape',
          points: [...right, ...left].join(' '),
          fill: color,
          'fill-opacity': '0.35',
          stroke: color,
          'data-group': cls.group,
        }),
      )
      for (const v of cls.points) {
        svg.append(
          svgEl('circle', {
            class: 'violin-point',
            cx: String(cx),
            cy: String(panelH * (1 - (v - lo) / span)),
            r: '1.5',
            fill: color,
          }),
        )
      }
      const label = svgEl('text', {
        x: String(cx), y: String(panelH + 12), 'text-anchor': 'middle', 'font-size': '9',
      })
      label.textContent = cls.group
      svg.append(label)
    })
    wrap.append(
      el('div', { class: 'violin-cell' }, [el('div', { class: 'violin-title' }, [violin.feature]), svg]),
    )
  }
  return wrap
}
