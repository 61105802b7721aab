// Renderer-agnostic scene description. Scene builders are pure functions
// from API payloads to Shape lists, so the views are testable without a DOM.

export interface CircleShape {
  kind: 'circle';
  className: string;
  cx: number;
  cy: number;
  r: number;
  stroke?: string;
  fill?: string;
  dashed?: boolean;
  machineId?: string;
  zoomed?: boolean;
  title?: string;
}

export interface AnnulusShape {
  kind: 'annulus';
  className: string;
  cx: number;
  cy: number;
  rInner: number;
  rOuter: number;
  fill: string;
  machineId: string;
  zoomed?: boolean;
  title?: string;
}

export interface LineShape {
  kind: 'line';
  className: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  stroke: string;
  dashed?: boolean;
  title?: string;
}

export interface PolylineShape {
  kind: 'polyline';
  className: string;
  points: string;
  stroke: string;
  machineId?: string;
  title?: string;
}

export interface PolygonShape {
  kind: 'polygon';
  className: string;
  points: string;
  fill: string;
}

export interface TextShape {
  kind: 'text';
  className: string;
  x: number;
  y: number;
  text: string;
}

export type Shape =
  | CircleShape
  | AnnulusShape
  | LineShape
  | PolylineShape
  | PolygonShape
  | TextShape;

export function shapesOfClass(shapes: Shape[], className: string): Shape[] {
  return shapes.filter((s) => 'className' in s && s.className === className);
}
