import { ApiClient } from './api.js';
import { buildBubbleScene } from './bubble.js';
import { buildJobLinesScene, type ChartGeometry } from './lines.js';
import type { Shape } from './scene.js';
import { clampState, defaultViewState, decodeState, encodeState, type ViewState } from './state.js';
import { buildTimelineScene } from './timeline.js';
import type {
  AggregateSeries,
  JobSummary,
  LayoutTree,
  LinksPayload,
  Manifest,
  Metric,
  SeriesBundle,
  TimeWindow,
} from './types.js';

// Orchestration: owns the view state, fetches through the API client, and
// hands finished scenes to a render sink. Pure of DOM concerns, so the
// interaction contract is testable headlessly. Superseded fetches are
// cancelled; a failed fetch reports an error and keeps the stale scene.

export interface RenderSink {
  bubble(shapes: Shape[]): void;
  overview(shapes: Shape[], bundle: SeriesBundle): void;
  detail(shapes: Shape[] | null): void;
  timeline(shapes: Shape[]): void;
  jobList(jobs: JobSummary[], selected: string | null): void;
  error(message: string): void;
  stateChanged(fragment: string): void;
}

export interface AppOptions {
  overviewGeometry?: { width: number; height: number };
  timelineGeometry?: { width: number; height: number };
  seriesPoints?: number;
}

const METRICS: Metric[] = ['cpu', 'mem', 'disk'];

export class AppController {
  state: ViewState;
  manifest: Manifest | null = null;
  private jobs: JobSummary[] = [];
  private layoutTree: LayoutTree | null = null;
  private links: LinksPayload | null = null;
  private overviewBundle: SeriesBundle | null = null;
  private aborters = new Map<string, AbortController>();
  private readonly overviewGeom: { width: number; height: number };
  private readonly timelineGeom: { width: number; height: number };
  private readonly seriesPoints: number;

  constructor(
    private readonly api: ApiClient,
    private readonly sink: RenderSink,
    options: AppOptions = {},
  ) {
    this.state = defaultViewState(0);
    this.overviewGeom = options.overviewGeometry ?? { width: 640, height: 160 };
    this.timelineGeom = options.timelineGeometry ?? { width: 640, height: 120 };
    this.seriesPoints = options.seriesPoints ?? 400;
  }

  private signal(key: string): AbortSignal {
    this.aborters.get(key)?.abort();
    const controller = new AbortController();
    this.aborters.set(key, controller);
    return controller.signal;
  }

  private publishState(): void {
    this.sink.stateChanged(encodeState(this.state));
  }

  async init(fragment = ''): Promise<void> {
    this.manifest = await this.api.manifest();
    const horizon = this.manifest.horizon_seconds;
    this.state = fragment ? decodeState(fragment, horizon) : defaultViewState(horizon);
    this.jobs = await this.api.jobs();
    if (!this.state.selectedJob) {
      this.state.selectedJob = this.defaultJob(this.state.selectedTimestamp);
    }
    this.state = clampState(this.state, horizon);
    await Promise.all([this.refreshTimeline(), this.refreshBubble(), this.refreshCharts()]);
    this.publishState();
  }

  /** Active job with the largest machine set at t; null when none. */
  defaultJob(t: number): string | null {
    const active = this.jobs.filter(
      (j) => j.start_ts !== null && j.start_ts <= t && (j.end_ts === null || j.end_ts > t),
    );
    if (active.length === 0) return null;
    active.sort((a, b) => b.machine_count - a.machine_count || (a.job_id < b.job_id ? -1 : 1));
    return active[0].job_id;
  }

  private async refreshTimeline(): Promise<void> {
    if (!this.manifest) return;
    const resolution = Math.max(
      this.manifest.usage_resolution_s,
      Math.floor(this.manifest.horizon_seconds / 120),
    );
    try {
      const signal = this.signal('timeline');
      const layers: AggregateSeries[] = await Promise.all(
        METRICS.map((m) => this.api.timeline(m, resolution, signal)),
      );
      this.sink.timeline(buildTimelineScene(
        layers,
        this.timelineGeom.width,
        this.timelineGeom.height,
        this.manifest.horizon_seconds,
        this.state.selectedTimestamp,
      ));
    } catch (err) {
      this.reportError('timeline', err);
    }
  }

  private async refreshBubble(): Promise<void> {
    try {
      const signal = this.signal('layout');
      const t = this.state.selectedTimestamp;
      const [tree, links] = await Promise.all([
        this.api.layout(t, signal),
        this.api.links(t, signal),
      ]);
      this.layoutTree = tree;
      this.links = links;
      this.renderBubble();
    } catch (err) {
      this.reportError('bubble chart', err);
    }
  }

  private renderBubble(): void {
    if (!this.layoutTree) return;
    this.sink.bubble(buildBubbleScene(
      this.layoutTree,
      this.links?.machines ?? {},
      this.state.hoveredMachine,
    ));
  }

  private overviewWindow(): TimeWindow {
    return { t_from: 0, t_to: this.manifest?.horizon_seconds ?? 1 };
  }

  private async refreshCharts(): Promise<void> {
    if (!this.state.selectedJob) {
      this.sink.detail(null);
      this.sink.jobList(this.jobs, null);
      return;
    }
    this.sink.jobList(this.jobs, this.state.selectedJob);
    try {
      const signal = this.signal('overview');
      const window = this.overviewWindow();
      const bundle = await this.api.jobSeries(
        this.state.selectedJob, this.state.activeMetric, window, this.seriesPoints, signal);
      this.overviewBundle = bundle;
      const geom: ChartGeometry = { ...this.overviewGeom, window };
      this.sink.overview(buildJobLinesScene(bundle, geom, false), bundle);
    } catch (err) {
      this.reportError('job charts', err);
      return;
    }
    if (this.state.brushWindow) {
      await this.fetchDetail(this.state.brushWindow);
    } else {
      this.sink.detail(null);
    }
  }

  private async fetchDetail(window: TimeWindow): Promise<void> {
    if (!this.state.selectedJob) return;
    try {
      const signal = this.signal('detail');
      const bundle = await this.api.jobSeries(
        this.state.selectedJob, this.state.activeMetric, window, this.seriesPoints, signal);
      const geom: ChartGeometry = { ...this.overviewGeom, window };
      this.sink.detail(buildJobLinesScene(bundle, geom, true));
    } catch (err) {
      this.reportError('detail chart', err);
    }
  }

  async chooseTimestamp(t: number): Promise<void> {
    if (!this.manifest) return;
    const horizon = this.manifest.horizon_seconds;
    this.state.selectedTimestamp = Math.min(Math.max(t, 0), horizon - 1);
    if (!this.state.selectedJob) {
      this.state.selectedJob = this.defaultJob(this.state.selectedTimestamp);
    }
    this.publishState();
    await Promise.all([this.refreshBubble(), this.refreshTimeline(), this.refreshCharts()]);
  }

  /** Brushing the overview triggers exactly one detail fetch. */
  async brushOverview(window: TimeWindow): Promise<void> {
    if (!this.state.selectedJob) return;
    this.state.brushWindow = window;
    this.publishState();
    await this.fetchDetail(window);
  }

  async clearBrush(): Promise<void> {
    this.state.brushWindow = null;
    this.publishState();
    this.sink.detail(null);
  }

  hoverMachine(machineId: string | null): void {
    if (this.state.hoveredMachine === machineId) return;
    this.state.hoveredMachine = machineId;
    this.renderBubble();
    this.publishState();
  }

  async selectJob(jobId: string): Promise<void> {
    this.state.selectedJob = jobId;
    this.state.brushWindow = null; // a brush belongs to one job's charts
    this.publishState();
    await this.refreshCharts();
  }

  async setMetric(metric: Metric): Promise<void> {
    this.state.activeMetric = metric;
    this.publishState();
    await this.refreshCharts();
  }

  get overview(): SeriesBundle | null {
    return this.overviewBundle;
  }

  private reportError(what: string, err: unknown): void {
    if (err instanceof Error && err.name === 'AbortError') return;
    this.sink.error(`${what}: ${err instanceof Error ? err.message : String(err)}`);
  }
}
