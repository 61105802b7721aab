// Payload shapes of the batchlens HTTP API.

export type Metric = 'cpu' | 'mem' | 'disk';

export interface Manifest {
  epoch_ts: number;
  horizon_seconds: number;
  usage_resolution_s: number;
  scheduler_resolution_s: number;
  machine_count: number;
  job_count: number;
  task_count: number;
  instance_count: number;
  format_version: number;
}

export interface Annulus {
  metric: Metric;
  r0: number;
  r1: number;
  color: string;
  value: number | null;
}

export interface LayoutNode {
  id: string;
  kind: 'job' | 'task' | 'machine';
  cx: number;
  cy: number;
  r: number;
  annuli: Annulus[];
  children: LayoutNode[];
}

export interface LayoutTree {
  timestamp: number;
  out_of_range: boolean;
  roots: LayoutNode[];
}

export interface JobSummary {
  job_id: string;
  task_count: number;
  instance_count: number;
  start_ts: number | null;
  end_ts: number | null;
  machine_count: number;
}

export interface SeriesPayload {
  machine_id: string;
  metric: Metric;
  points: [number, number][];
}

export interface AnnotationPayload {
  kind: 'start' | 'end';
  timestamp: number;
  task_id: string;
  machine_id: string;
}

export interface SeriesBundle {
  job_id: string;
  metric: Metric;
  series: SeriesPayload[];
  annotations: AnnotationPayload[];
  task_color_index: Record<string, number>;
}

export interface TimelinePoint {
  timestamp: number;
  mean: number;
  min: number;
  max: number;
}

export interface AggregateSeries {
  metric: Metric;
  points: TimelinePoint[];
}

export interface LinksPayload {
  timestamp: number;
  out_of_range: boolean;
  machines: Record<string, string[]>;
}

export interface TimeWindow {
  t_from: number;
  t_to: number;
}
