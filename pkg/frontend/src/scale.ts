// Minimal linear scales; the layout geometry itself comes from the API.

export interface LinearScale {
  (value: number): number;
  invert(px: number): number;
}

export function linearScale(
  domainLo: number,
  domainHi: number,
  rangeLo: number,
  rangeHi: number,
): LinearScale {
  const span = domainHi - domainLo || 1;
  const scale = ((value: number) =>
    rangeLo + ((value - domainLo) / span) * (rangeHi - rangeLo)) as LinearScale;
  scale.invert = (px: number) =>
    domainLo + ((px - rangeLo) / (rangeHi - rangeLo || 1)) * span;
  return scale;
}

export function extent(values: number[], fallback: [number, number] = [0, 1]): [number, number] {
  if (values.length === 0) return fallback;
  let lo = values[0];
  let hi = values[0];
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

export function polylinePoints(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) parts.push(`${xs[i]},${ys[i]}`);
  return parts.join(' ');
}
