// By-set classification comparison: mean statistic with +-1 sd whiskers
// and the post-filter feature count in each axis label.

import { clear, el, svgEl, fmt } from '../dom'
import { groupColor } from '../colors'
import type { ClassificationArtifact } from '../types'

const PLOT_H = 220
const BAR_W = 64
const GAP = 26
const TOP = 16
const LEFT = 46

export function renderClassify(container: HTMLElement, artifact: ClassificationArtifact): void {
  clear(container)
  const rows = artifact.rows
  const width = LEFT + rows.length * (BAR_W + GAP) + 20
  const height = TOP + PLOT_H + 64

  const svg = svgEl('svg', {
    class: 'classify-bars',
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
  })

  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const y = TOP + PLOT_H * (1 - tick)
    svg.append(
      svgEl('line', {
        x1: String(LEFT - 4), y1: String(y), x2: String(width - 10), y2: String(y),
        stroke: '#e3e3e3',
      }),
    )
    const label = svgEl('text', {
      x: String(LEFT - 8), y: String(y + 3), 'text-anchor': 'end', 'font-size': '9',
    })
    label.textContent = String(tick)
    svg.append(label)
  }

  rows.forEach((row, k) => {
    const x = LEFT + k * (BAR_W + GAP)
    const yMean = TOP + PLOT_H * (1 - row.mean)
    svg.append(
      svgEl('rect', {
        class: 'set-bar',
        x: String(x), y: String(yMean),
        width: String(BAR_W), height: String(TOP + PLOT_H - yMean),
        fill: groupColor(k), 'fill-opacity': '0.8',
        'data-set': row.set, 'data-mean': String(row.mean),
      }),
    )
    const cx = x + BAR_W / 2
    const yLo = TOP + PLOT_H * (1 - Math.max(row.mean - row.sd, 0))
    const yHi = TOP + PLOT_H * (1 - Math.min(row.mean + row.sd, 1))
    svg.append(
      svgEl('line', {
        class: 'sd-whisker',
        x1: String(cx), y1: String(yLo), x2: String(cx), y2: String(yHi),
        stroke: '#222', 'stroke-width': '1.5',
      }),
    )
    const label = svgEl('text', {
      class: 'set-label',
      x: String(cx), y: String(TOP + PLOT_H + 16), 'text-anchor': 'middle', 'font-size': '10',
    })
    label.textContent = `${row.set} (${row.feature_count})`
    svg.append(label)
    if (row.p_value !== undefined) {
      const p = svgEl('text', {
        class: 'p-label',
        x: String(cx), y: String(TOP + PLOT_H + 30), 'text-anchor': 'middle', 'font-size': '9',
      })
      p.textContent = `p=${fmt(row.p_value)}`
      svg.append(p)
    }
  })

  container.append(
    el('div', { class: 'classify-view' }, [
      el('div', { class: 'classify-caption' }, [
        `${artifact.statistic} over ${rows[0]?.fold_statistics.length ?? 0} folds`,
      ]),
      svg,
    ]),
  )
}
