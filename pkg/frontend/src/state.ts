import type { Metric, TimeWindow } from './types.js';

// Everything needed to reproduce a scene lives in the URL fragment, so a
// reload (or a shared link) lands on the identical view.
export interface ViewState {
  selectedTimestamp: number;
  brushWindow: TimeWindow | null;
  selectedJob: string | null;
  hoveredMachine: string | null;
  activeMetric: Metric;
}

const METRICS: Metric[] = ['cpu', 'mem', 'disk'];

export function defaultViewState(horizonSeconds: number): ViewState {
  return {
    selectedTimestamp: Math.floor(horizonSeconds / 2),
    brushWindow: null,
    selectedJob: null,
    hoveredMachine: null,
    activeMetric: 'cpu',
  };
}

export function clampState(state: ViewState, horizonSeconds: number): ViewState {
  const clamp = (t: number) => Math.min(Math.max(t, 0), horizonSeconds - 1);
  let brush = state.brushWindow;
  if (brush) {
    const t_from = Math.max(0, brush.t_from);
    const t_to = Math.min(horizonSeconds, brush.t_to);
    brush = t_from < t_to ? { t_from, t_to } : null;
  }
  return {
    ...state,
    selectedTimestamp: clamp(state.selectedTimestamp),
    // a brush window is only meaningful for a selected job
    brushWindow: state.selectedJob ? brush : null,
  };
}

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set('t', String(state.selectedTimestamp));
  params.set('metric', state.activeMetric);
  if (state.selectedJob) params.set('job', state.selectedJob);
  if (state.brushWindow) params.set('brush', `${state.brushWindow.t_from}-${state.brushWindow.t_to}`);
  if (state.hoveredMachine) params.set('hover', state.hoveredMachine);
  return params.toString();
}

export function decodeState(fragment: string, horizonSeconds: number): ViewState {
  const params = new URLSearchParams(fragment.replace(/^#/, ''));
  const state = defaultViewState(horizonSeconds);
  const t = Number(params.get('t'));
  if (Number.isFinite(t) && params.get('t') !== null) state.selectedTimestamp = Math.floor(t);
  const metric = params.get('metric');
  if (metric && (METRICS as string[]).includes(metric)) state.activeMetric = metric as Metric;
  state.selectedJob = params.get('job');
  const brush = params.get('brush');
  if (brush) {
    const [from, to] = brush.split('-').map(Number);
    if (Number.isFinite(from) && Number.isFinite(to) && from < to) {
      state.brushWindow = { t_from: from, t_to: to };
    }
  }
  state.hoveredMachine = params.get('hover');
  return clampState(state, horizonSeconds);
}
