import { END_ANNOTATION_DEFAULT, START_ANNOTATION_COLOR, taskColor } from './palette.js';
import { extent, linearScale, polylinePoints, type LinearScale } from './scale.js';
import type { Shape } from './scene.js';
import type { SeriesBundle, TimeWindow } from './types.js';

// Job line charts: one line per machine executing the job, vertical start
// annotations in green, end annotations in a single non-green color on the
// overview and in per-task categorical colors on the brushed detail view.

export const MACHINE_LINE = 'machine-line';
export const START_LINE = 'annotation-start';
export const END_LINE = 'annotation-end';
export const CHART_FRAME = 'chart-frame';

const OVERVIEW_LINE_COLOR = '#7A8B99';

export interface ChartGeometry {
  width: number;
  height: number;
  window: TimeWindow;
}

export function timeScale(geom: ChartGeometry): LinearScale {
  return linearScale(geom.window.t_from, geom.window.t_to, 0, geom.width);
}

/** Task each machine line is colored by: its first annotation's task. */
export function machineTasks(bundle: SeriesBundle): Record<string, string> {
  const out: Record<string, string> = {};
  const sorted = [...bundle.annotations].sort((a, b) =>
    a.task_id < b.task_id ? -1 : a.task_id > b.task_id ? 1 : 0);
  for (const ann of sorted) {
    if (!(ann.machine_id in out)) out[ann.machine_id] = ann.task_id;
  }
  return out;
}

export function buildJobLinesScene(
  bundle: SeriesBundle,
  geom: ChartGeometry,
  perTaskColors: boolean,
): Shape[] {
  const shapes: Shape[] = [];
  const x = timeScale(geom);
  const values = bundle.series.flatMap((s) => s.points.map((p) => p[1]));
  const [lo, hi] = extent(values, [0, 100]);
  const y = linearScale(lo, hi, geom.height - 4, 4);
  const taskOf = machineTasks(bundle);

  shapes.push({
    kind: 'polygon', className: CHART_FRAME, fill: 'none',
    points: polylinePoints([0, geom.width, geom.width, 0], [0, 0, geom.height, geom.height]),
  });

  for (const series of bundle.series) {
    if (series.points.length === 0) continue;
    const color = perTaskColors
      ? taskColor(bundle.task_color_index[taskOf[series.machine_id]] ?? 0)
      : OVERVIEW_LINE_COLOR;
    shapes.push({
      kind: 'polyline', className: MACHINE_LINE,
      points: polylinePoints(
        series.points.map((p) => x(p[0])),
        series.points.map((p) => y(p[1])),
      ),
      stroke: color, machineId: series.machine_id, title: series.machine_id,
    });
  }

  for (const ann of bundle.annotations) {
    if (ann.timestamp < geom.window.t_from || ann.timestamp >= geom.window.t_to) continue;
    const px = x(ann.timestamp);
    const isStart = ann.kind === 'start';
    const color = isStart
      ? START_ANNOTATION_COLOR
      : perTaskColors
        ? taskColor(bundle.task_color_index[ann.task_id] ?? 0)
        : END_ANNOTATION_DEFAULT;
    shapes.push({
      kind: 'line', className: isStart ? START_LINE : END_LINE,
      x1: px, y1: 0, x2: px, y2: geom.height,
      stroke: color, dashed: !isStart,
      title: `${ann.kind} ${ann.task_id} @ ${ann.timestamp} (${ann.machine_id})`,
    });
  }

  return shapes;
}

/** Convert a pixel drag on the overview into a half-open brush window. */
export function brushToWindow(pxA: number, pxB: number, geom: ChartGeometry): TimeWindow | null {
  const x = timeScale(geom);
  const lo = Math.min(pxA, pxB);
  const hi = Math.max(pxA, pxB);
  const t_from = Math.max(geom.window.t_from, Math.floor(x.invert(lo)));
  const t_to = Math.min(geom.window.t_to, Math.ceil(x.invert(hi)));
  return t_from < t_to ? { t_from, t_to } : null;
}
