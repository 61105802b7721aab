import { extent, linearScale, polylinePoints } from './scale.js';
import type { Shape } from './scene.js';
import type { AggregateSeries } from './types.js';

// Cluster-wide timeline: one layer per metric, each a min/max band with a
// mean line. Clicking chooses the snapshot timestamp (clamped to horizon).

export const TIMELINE_BAND = 'timeline-band';
export const TIMELINE_MEAN = 'timeline-mean';
export const TIMELINE_CURSOR = 'timeline-cursor';
export const TIMELINE_LABEL = 'timeline-label';

const LAYER_COLORS: Record<string, string> = {
  cpu: '#4C78A8',
  mem: '#F58518',
  disk: '#54A24B',
};

export function buildTimelineScene(
  layers: AggregateSeries[],
  width: number,
  height: number,
  horizonSeconds: number,
  selectedTimestamp: number,
): Shape[] {
  const shapes: Shape[] = [];
  const layerHeight = height / Math.max(layers.length, 1);
  const x = linearScale(0, horizonSeconds, 0, width);

  layers.forEach((agg, index) => {
    const top = index * layerHeight;
    const [lo, hi] = extent(agg.points.flatMap((p) => [p.min, p.max]), [0, 100]);
    const y = linearScale(lo, hi, top + layerHeight - 3, top + 3);
    const color = LAYER_COLORS[agg.metric] ?? '#888888';
    if (agg.points.length > 0) {
      const forward = agg.points.map((p) => [x(p.timestamp), y(p.max)] as const);
      const backward = [...agg.points].reverse().map((p) => [x(p.timestamp), y(p.min)] as const);
      shapes.push({
        kind: 'polygon', className: TIMELINE_BAND,
        points: polylinePoints(
          [...forward, ...backward].map((p) => p[0]),
          [...forward, ...backward].map((p) => p[1]),
        ),
        fill: color,
      });
      shapes.push({
        kind: 'polyline', className: TIMELINE_MEAN,
        points: polylinePoints(
          agg.points.map((p) => x(p.timestamp)),
          agg.points.map((p) => y(p.mean)),
        ),
        stroke: color,
      });
    }
    shapes.push({
      kind: 'text', className: TIMELINE_LABEL,
      x: 4, y: top + 12, text: agg.metric,
    });
  });

  const cursorX = x(selectedTimestamp);
  shapes.push({
    kind: 'line', className: TIMELINE_CURSOR,
    x1: cursorX, y1: 0, x2: cursorX, y2: height,
    stroke: '#222222',
  });
  return shapes;
}

/** Map a click x-pixel to a timestamp, clamped inside the horizon. */
export function pickTimestamp(px: number, width: number, horizonSeconds: number): number {
  const x = linearScale(0, horizonSeconds, 0, width);
  const t = Math.round(x.invert(px));
  return Math.min(Math.max(t, 0), horizonSeconds - 1);
}
