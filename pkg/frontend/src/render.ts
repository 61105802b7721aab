import type { Shape } from './scene.js';

// Thin SVG adapter: scene shapes in, DOM out. All interactivity is event
// delegation on the host <svg>, keyed by data-machine-id attributes.

const SVG_NS = 'http://www.w3.org/2000/svg';

function annulusPath(cx: number, cy: number, rInner: number, rOuter: number): string {
  // full ring as two concentric circles with even-odd fill
  const outer = `M ${cx + rOuter} ${cy} ` +
    `A ${rOuter} ${rOuter} 0 1 0 ${cx - rOuter} ${cy} ` +
    `A ${rOuter} ${rOuter} 0 1 0 ${cx + rOuter} ${cy} Z`;
  if (rInner <= 0) return outer;
  const inner = `M ${cx + rInner} ${cy} ` +
    `A ${rInner} ${rInner} 0 1 0 ${cx - rInner} ${cy} ` +
    `A ${rInner} ${rInner} 0 1 0 ${cx + rInner} ${cy} Z`;
  return outer + ' ' + inner;
}

function setZoom(el: SVGElement, cx: number, cy: number, zoomed: boolean | undefined): void {
  if (zoomed) {
    el.setAttribute('transform', `translate(${cx} ${cy}) scale(2) translate(${-cx} ${-cy})`);
    el.classList.add('zoomed');
  }
}

export function renderShapes(svg: SVGSVGElement, shapes: Shape[]): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  for (const shape of shapes) {
    let el: SVGElement;
    switch (shape.kind) {
      case 'circle': {
        el = document.createElementNS(SVG_NS, 'circle');
        el.setAttribute('cx', String(shape.cx));
        el.setAttribute('cy', String(shape.cy));
        el.setAttribute('r', String(shape.r));
        el.setAttribute('fill', shape.fill ?? 'none');
        if (shape.stroke) el.setAttribute('stroke', shape.stroke);
        if (shape.dashed) el.setAttribute('stroke-dasharray', '4 3');
        if (shape.machineId) el.dataset.machineId = shape.machineId;
        setZoom(el, shape.cx, shape.cy, shape.zoomed);
        break;
      }
      case 'annulus': {
        el = document.createElementNS(SVG_NS, 'path');
        el.setAttribute('d', annulusPath(shape.cx, shape.cy, shape.rInner, shape.rOuter));
        el.setAttribute('fill', shape.fill);
        el.setAttribute('fill-rule', 'evenodd');
        el.dataset.machineId = shape.machineId;
        setZoom(el, shape.cx, shape.cy, shape.zoomed);
        break;
      }
      case 'line': {
        el = document.createElementNS(SVG_NS, 'line');
        el.setAttribute('x1', String(shape.x1));
        el.setAttribute('y1', String(shape.y1));
        el.setAttribute('x2', String(shape.x2));
        el.setAttribute('y2', String(shape.y2));
        el.setAttribute('stroke', shape.stroke);
        if (shape.dashed) el.setAttribute('stroke-dasharray', '4 3');
        break;
      }
      case 'polyline': {
        el = document.createElementNS(SVG_NS, 'polyline');
        el.setAttribute('points', shape.points);
        el.setAttribute('fill', 'none');
        el.setAttribute('stroke', shape.stroke);
        if (shape.machineId) el.dataset.machineId = shape.machineId;
        break;
      }
      case 'polygon': {
        el = document.createElementNS(SVG_NS, 'polygon');
        el.setAttribute('points', shape.points);
        el.setAttribute('fill', shape.fill);
        if (shape.fill !== 'none') el.setAttribute('fill-opacity', '0.25');
        break;
      }
      case 'text': {
        el = document.createElementNS(SVG_NS, 'text');
        el.setAttribute('x', String(shape.x));
        el.setAttribute('y', String(shape.y));
        el.textContent = shape.text;
        break;
      }
    }
    el.classList.add(shape.className);
    if ('title' in shape && shape.title) {
      const title = document.createElementNS(SVG_NS, 'title');
      title.textContent = shape.title;
      el.appendChild(title);
    }
    svg.appendChild(el);
  }
}

/** Fit the svg viewBox to the rendered content with a small margin. */
export function fitViewBox(svg: SVGSVGElement, margin = 12): void {
  const box = svg.getBBox();
  svg.setAttribute(
    'viewBox',
    `${box.x - margin} ${box.y - margin} ${box.width + 2 * margin} ${box.height + 2 * margin}`,
  );
}
