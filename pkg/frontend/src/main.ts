import { ApiClient } from './api.js';
import { AppController, type RenderSink } from './app.js';
import { brushToWindow, type ChartGeometry } from './lines.js';
import { fitViewBox, renderShapes } from './render.js';
import type { Shape } from './scene.js';
import { pickTimestamp } from './timeline.js';
import type { JobSummary, Metric, SeriesBundle } from './types.js';

// Browser entry point: bind the controller to the page, keep the view
// state in the URL fragment, and translate DOM events into interactions.

const OVERVIEW = { width: 640, height: 160 };
const TIMELINE = { width: 640, height: 120 };

function el<T extends Element>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as unknown as T;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get('api') ?? '';
  const api = new ApiClient(apiBase);

  const bubbleSvg = el<SVGSVGElement>('bubble');
  const overviewSvg = el<SVGSVGElement>('overview');
  const detailSvg = el<SVGSVGElement>('detail');
  const timelineSvg = el<SVGSVGElement>('timeline');
  const detailPanel = el<HTMLElement>('detail-panel');
  const errorBanner = el<HTMLElement>('error-banner');
  const jobSelect = el<HTMLSelectElement>('job-select');
  const metricSelect = el<HTMLSelectElement>('metric-select');
  const clearBrushButton = el<HTMLButtonElement>('clear-brush');

  const sink: RenderSink = {
    bubble(shapes: Shape[]) {
      renderShapes(bubbleSvg, shapes);
      fitViewBox(bubbleSvg);
      errorBanner.hidden = true;
    },
    overview(shapes: Shape[], bundle: SeriesBundle) {
      renderShapes(overviewSvg, shapes);
      overviewSvg.setAttribute('viewBox', `0 0 ${OVERVIEW.width} ${OVERVIEW.height}`);
      overviewSvg.dataset.jobId = bundle.job_id;
    },
    detail(shapes: Shape[] | null) {
      detailPanel.hidden = shapes === null;
      if (shapes !== null) {
        renderShapes(detailSvg, shapes);
        detailSvg.setAttribute('viewBox', `0 0 ${OVERVIEW.width} ${OVERVIEW.height}`);
      }
    },
    timeline(shapes: Shape[]) {
      renderShapes(timelineSvg, shapes);
      timelineSvg.setAttribute('viewBox', `0 0 ${TIMELINE.width} ${TIMELINE.height}`);
    },
    jobList(jobs: JobSummary[], selected: string | null) {
      jobSelect.innerHTML = '';
      for (const job of jobs) {
        const option = document.createElement('option');
        option.value = job.job_id;
        option.textContent = `${job.job_id} (${job.machine_count} machines)`;
        option.selected = job.job_id === selected;
        jobSelect.appendChild(option);
      }
    },
    error(message: string) {
      errorBanner.textContent = message;
      errorBanner.hidden = false; // stale scene stays on screen
    },
    stateChanged(fragment: string) {
      history.replaceState(null, '', `#${fragment}`);
    },
  };

  const app = new AppController(api, sink, {
    overviewGeometry: OVERVIEW,
    timelineGeometry: TIMELINE,
  });

  // -- bubble chart hover ---------------------------------------------------
  bubbleSvg.addEventListener('mouseover', (event) => {
    const target = event.target as SVGElement;
    const machineId = target.dataset?.machineId;
    if (machineId) app.hoverMachine(machineId);
  });
  bubbleSvg.addEventListener('mouseleave', () => app.hoverMachine(null));

  // -- timeline choose ------------------------------------------------------
  timelineSvg.addEventListener('click', (event) => {
    if (!app.manifest) return;
    const rect = timelineSvg.getBoundingClientRect();
    const px = ((event.clientX - rect.left) / rect.width) * TIMELINE.width;
    void app.chooseTimestamp(pickTimestamp(px, TIMELINE.width, app.manifest.horizon_seconds));
  });

  // -- overview brushing ----------------------------------------------------
  let brushStart: number | null = null;
  const overviewPx = (event: MouseEvent) => {
    const rect = overviewSvg.getBoundingClientRect();
    return ((event.clientX - rect.left) / rect.width) * OVERVIEW.width;
  };
  overviewSvg.addEventListener('mousedown', (event) => {
    brushStart = overviewPx(event);
  });
  overviewSvg.addEventListener('mouseup', (event) => {
    if (brushStart === null || !app.manifest) return;
    const geom: ChartGeometry = {
      ...OVERVIEW,
      window: { t_from: 0, t_to: app.manifest.horizon_seconds },
    };
    const window_ = brushToWindow(brushStart, overviewPx(event), geom);
    brushStart = null;
    if (window_) void app.brushOverview(window_);
  });
  clearBrushButton.addEventListener('click', () => void app.clearBrush());

  // -- selectors --------------------------------------------------------
  jobSelect.addEventListener('change', () => void app.selectJob(jobSelect.value));
  metricSelect.addEventListener('change', () => void app.setMetric(metricSelect.value as Metric));

  void app.init(window.location.hash).catch((err) => sink.error(String(err)));
}

main();
