// Embedding scatter: one point per series, group colors, optional 95%
// covariance ellipses. The ellipse toggle re-renders from the cached
// artifact; it never refetches.

import { clear, el, svgEl, fmt } from '../dom'
import { groupPalette } from '../colors'
import type { EmbeddingArtifact } from '../types'

const SIZE = 440
const PAD = 40
const CHI2_95_2DF = 5.991464547107979

export interface ProjectionOptions {
  showCovariance: boolean
  onPointClick?: (seriesId: string) => void
  /** current pan/zoom viewport; survives re-renders when passed back in */
  viewBox?: string | null
  onViewBoxChange?: (viewBox: string) => void
}

function attachPanZoom(svg: SVGElement, onChange?: (viewBox: string) => void): void {
  const current = () => (svg.getAttribute('viewBox') ?? `0 0 ${SIZE} ${SIZE}`).split(' ').map(Number)
  const apply = (x: number, y: number, w: number, h: number) => {
    const next = `${x} ${y} ${w} ${h}`
    svg.setAttribute('viewBox', next)
    onChange?.(next)
  }
  svg.addEventListener('wheel', (ev) => {
    ev.preventDefault()
    const [x, y, w, h] = current()
    const factor = (ev as WheelEvent).deltaY < 0 ? 0.8 : 1.25
    const nw = w * factor
    const nh = h * factor
    apply(x + (w - nw) / 2, y + (h - nh) / 2, nw, nh)
  })
  let dragging: { startX: number; startY: number; box: number[] } | null = null
  svg.addEventListener('pointerdown', (ev) => {
    dragging = { startX: (ev as PointerEvent).clientX, startY: (ev as PointerEvent).clientY, box: current() }
  })
  svg.addEventListener('pointermove', (ev) => {
    if (!dragging) return
    const [x, y, w, h] = dragging.box
    const dx = (((ev as PointerEvent).clientX - dragging.startX) / SIZE) * w
    const dy = (((ev as PointerEvent).clientY - dragging.startY) / SIZE) * h
    apply(x - dx, y - dy, w, h)
  })
  const stop = () => {
    dragging = null
  }
  svg.addEventListener('pointerup', stop)
  svg.addEventListener('pointerleave', stop)
}

export function renderProjection(
  container: HTMLElement,
  artifact: EmbeddingArtifact,
  options: ProjectionOptions = { showCovariance: false },
): void {
  clear(container)
  const xs = artifact.coords.map((c) => c[0])
  const ys = artifact.coords.map((c) => c[1])
  const xMin = Math.min(...xs)
  const xMax = Math.max(...xs)
  const yMin = Math.min(...ys)
  const yMax = Math.max(...ys)
  const xSpan = xMax - xMin || 1
  const ySpan = yMax - yMin || 1
  const sx = (v: number) => PAD + ((v - xMin) / xSpan) * (SIZE - 2 * PAD)
  const sy = (v: number) => SIZE - PAD - ((v - yMin) / ySpan) * (SIZE - 2 * PAD)

  const svg = svgEl('svg', {
    class: 'projection-scatter',
    viewBox: options.viewBox ?? `0 0 ${SIZE} ${SIZE}`,
    width: String(SIZE),
    height: String(SIZE),
  })
  attachPanZoom(svg, options.onViewBoxChange)

  const palette = artifact.groups ? groupPalette(artifact.groups) : new Map<string, string>()

  if (options.showCovariance && artifact.ellipses) {
    for (const spec of artifact.ellipses) {
      if (spec.n < 3) continue
      const [[a, b], [, d]] = spec.cov
      const tr = a + d
      const det = a * d - b * b
      const gap = Math.sqrt(Math.max(tr * tr / 4 - det, 0))
      const l1 = tr / 2 + gap
      const l2 = tr / 2 - gap
      if (l1 <= 0) continue
      const angle = (Math.atan2(l1 - a, b || 1e-12) * 180) / Math.PI
      const cx = sx(spec.mean[0])
      const cy = sy(spec.mean[1])
      const rx = (Math.sqrt(l1 * CHI2_95_2DF) / xSpan) * (SIZE - 2 * PAD)
      const ry = (Math.sqrt(Math.max(l2, 0) * CHI2_95_2DF) / ySpan) * (SIZE - 2 * PAD)
      svg.append(
        svgEl('ellipse', {
          class: 'group-ellipse',
          cx: String(cx),
          cy: String(cy),
          rx: String(rx),
          ry: String(ry),
          transform: `rotate(${-angle} ${cx} ${cy})`,
          fill: 'none',
          stroke: palette.get(spec.group) ?? '#888',
          'stroke-dasharray': '5 3',
          'data-group': spec.group,
        }),
      )
    }
  }

  artifact.coords.forEach(([x, y], i) => {
    const group = artifact.groups?.[i]
    const point = svgEl('circle', {
      class: 'series-point',
      cx: String(sx(x)),
      cy: String(sy(y)),
      r: '4',
      fill: group ? palette.get(group)! : '#333',
      'fill-opacity': '0.85',
      'data-series-id': artifact.ids[i],
    })
    const title = svgEl('title')
    title.textContent = `${artifact.ids[i]}${group ? ` (${group})` : ''}`
    point.append(title)
    if (options.onPointClick) {
      point.addEventListener('click', () => options.onPointClick!(artifact.ids[i]))
    }
    svg.append(point)
  })

  const legend = el('div', { class: 'legend' })
  for (const [group, color] of palette) {
    legend.append(
      el('span', { class: 'legend-item', 'data-group': group }, [
        el('span', { class: 'swatch', style: `background:${color}` }),
        group,
      ]),
    )
  }

  const caption =
    artifact.method === 'pca' && artifact.variance_explained
      ? `PC1 ${fmt(artifact.variance_explained[0] * 100, 1)}% / PC2 ${fmt(
          artifact.variance_explained[1] * 100,
          1,
        )}% variance`
      : `${artifact.method} embedding`

  container.append(
    el('div', { class: 'projection-view' }, [
      el('div', { class: 'projection-caption' }, [caption]),
      svg,
      legend,
    ]),
  )
}
