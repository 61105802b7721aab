import { LINK_PALETTE } from './palette.js';
import type { Shape } from './scene.js';
import type { LayoutNode, LayoutTree } from './types.js';

// Bubble chart: three nested layers. Job outlines are dotted blue, task
// outlines dotted purple, machines are drawn as three metric annuli with
// the API's colors. Hovering a machine zooms it and draws dotted link
// lines between all duplicates of that machine across job bubbles.

export const JOB_OUTLINE = 'job-outline';
export const TASK_OUTLINE = 'task-outline';
export const MACHINE_ANNULUS = 'machine-annulus';
export const MACHINE_HIT = 'machine-hit';
export const LINK_LINE = 'link-line';

const JOB_STROKE = '#3A6FB0';
const TASK_STROKE = '#8E5DA8';

interface MachinePlacement {
  node: LayoutNode;
  jobId: string;
}

function collectMachines(tree: LayoutTree): MachinePlacement[] {
  const out: MachinePlacement[] = [];
  for (const job of tree.roots) {
    const walk = (node: LayoutNode) => {
      if (node.kind === 'machine') out.push({ node, jobId: job.id });
      for (const child of node.children) walk(child);
    };
    walk(job);
  }
  return out;
}

export function buildBubbleScene(
  tree: LayoutTree,
  links: Record<string, string[]>,
  hoveredMachine: string | null,
): Shape[] {
  const shapes: Shape[] = [];

  const walk = (node: LayoutNode) => {
    if (node.kind === 'job') {
      shapes.push({
        kind: 'circle', className: JOB_OUTLINE, cx: node.cx, cy: node.cy, r: node.r,
        stroke: JOB_STROKE, dashed: true, title: node.id,
      });
    } else if (node.kind === 'task') {
      shapes.push({
        kind: 'circle', className: TASK_OUTLINE, cx: node.cx, cy: node.cy, r: node.r,
        stroke: TASK_STROKE, dashed: true, title: node.id,
      });
    } else {
      const zoomed = node.id === hoveredMachine;
      for (const annulus of node.annuli) {
        shapes.push({
          kind: 'annulus', className: MACHINE_ANNULUS,
          cx: node.cx, cy: node.cy,
          rInner: annulus.r0 * node.r, rOuter: annulus.r1 * node.r,
          fill: annulus.color, machineId: node.id, zoomed,
          title: `${node.id} ${annulus.metric}: ${annulus.value ?? 'no data'}`,
        });
      }
      // transparent hit target on top of the annuli for hover events
      shapes.push({
        kind: 'circle', className: MACHINE_HIT, cx: node.cx, cy: node.cy, r: node.r,
        fill: 'transparent', machineId: node.id, zoomed, title: node.id,
      });
    }
    for (const child of node.children) walk(child);
  };
  for (const root of tree.roots) walk(root);

  shapes.push(...linkLines(tree, links, hoveredMachine));
  return shapes;
}

function linkLines(
  tree: LayoutTree,
  links: Record<string, string[]>,
  hoveredMachine: string | null,
): Shape[] {
  if (!hoveredMachine || (links[hoveredMachine] ?? []).length < 2) return [];
  const placements = collectMachines(tree).filter((p) => p.node.id === hoveredMachine);
  const lines: Shape[] = [];
  let pair = 0;
  for (let i = 0; i < placements.length; i++) {
    for (let j = i + 1; j < placements.length; j++) {
      const a = placements[i].node;
      const b = placements[j].node;
      lines.push({
        kind: 'line', className: LINK_LINE,
        x1: a.cx, y1: a.cy, x2: b.cx, y2: b.cy,
        stroke: LINK_PALETTE[pair % LINK_PALETTE.length], dashed: true,
        title: `${hoveredMachine}: ${placements[i].jobId} + ${placements[j].jobId}`,
      });
      pair++;
    }
  }
  return lines;
}
