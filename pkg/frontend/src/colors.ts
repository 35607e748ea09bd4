// Palettes: sequential for magnitudes, Okabe-Ito categorical for groups
// (both colorblind-safe).

const SEQ_STOPS: [number, number, number][] = [
  [68, 1, 84], [70, 50, 127], [54, 92, 141], [39, 127, 142],
  [31, 161, 135], [74, 194, 109], [159, 218, 58], [253, 231, 37],
]

export const CATEGORICAL = [
  '#0072B2', '#E69F00', '#009E73', '#CC79A7',
  '#56B4E9', '#D55E00', '#F0E442', '#000000',
]

export function seqColor(v: number): string {
  const t = Math.min(Math.max(v, 0), 1) * (SEQ_STOPS.length - 1)
  const lo = Math.floor(t)
  const hi = Math.min(lo + 1, SEQ_STOPS.length - 1)
  const frac = t - lo
  const rgb = SEQ_STOPS[lo].map((a, i) => Math.round(a + (SEQ_STOPS[hi][i] - a) * frac))
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`
}

export function groupColor(index: number): string {
  return CATEGORICAL[index % CATEGORICAL.length]
}

export function groupPalette(groups: string[]): Map<string, string> {
  const unique = [...new Set(groups)].sort()
  return new Map(unique.map((g, i) => [g, groupColor(i)]))
}
