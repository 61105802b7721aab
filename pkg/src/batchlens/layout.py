"""Hierarchy snapshots and deterministic circle-packing layout.

A snapshot at timestamp t is a three-level tree: active jobs, their tasks,
and the machines actively serving each (job, task) pair. The same machine
appears under every pair it serves, on purpose. The layout realizes the
tree as packed circles: machines are fixed-radius discs packed with a
front-chain algorithm, parents are minimal enclosing circles inflated by a
padding factor, and roots are packed with extra spacing. Metric values map
to colors on a fixed diverging ramp; every step is deterministic, so
identical inputs produce bit-identical geometry.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .store import TraceStore

METRICS = ("cpu", "mem", "disk")

# One annulus per metric, inner to outer, as fractions of the machine radius.
_RING_BOUNDS = ((0.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0), (2.0 / 3.0, 1.0))

# Diverging ramp: cool blue at 0, pale yellow at 50, alarm red at 100.
_RAMP = ((0.0, (44, 123, 182)), (50.0, (255, 255, 191)), (100.0, (215, 25, 28)))

# Overlap tolerated between packed siblings, relative to the radius sum.
# Kept an order of magnitude below the published 1e-6 guarantee.
_PACK_SLACK = 1e-7


@dataclass(frozen=True)
class Color:
    r: int
    g: int
    b: int

    @property
    def hex(self) -> str:
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"

    @classmethod
    def from_hex(cls, text: str) -> "Color":
        text = text.lstrip("#")
        return cls(int(text[0:2], 16), int(text[2:4], 16), int(text[4:6], 16))


ABSENT_COLOR = Color.from_hex("#BDBDBD")


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def color_for(value: float | None) -> Color:
    """Map a utilization percentage to the ramp; absent values go gray."""
    if value is None:
        return ABSENT_COLOR
    v = min(100.0, max(0.0, value))
    for (lo, lo_rgb), (hi, hi_rgb) in zip(_RAMP, _RAMP[1:]):
        if v <= hi:
            t = (v - lo) / (hi - lo)
            channels = tuple(
                _round_half_away(c0 + t * (c1 - c0)) for c0, c1 in zip(lo_rgb, hi_rgb)
            )
            return Color(*channels)
    return Color(*_RAMP[-1][1])


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float


@dataclass(frozen=True)
class AnnulusSpec:
    metric: str
    r_inner_frac: float
    r_outer_frac: float
    color: Color
    value: float | None


@dataclass(frozen=True)
class MachineNode:
    machine_id: str
    cpu_util: float | None
    mem_util: float | None
    disk_util: float | None

    def value(self, metric: str) -> float | None:
        return {"cpu": self.cpu_util, "mem": self.mem_util, "disk": self.disk_util}[metric]


@dataclass(frozen=True)
class TaskNode:
    task_id: str
    machines: tuple[MachineNode, ...]


@dataclass(frozen=True)
class JobNode:
    job_id: str
    tasks: tuple[TaskNode, ...]


@dataclass(frozen=True)
class HierarchySnapshot:
    timestamp: int
    roots: tuple[JobNode, ...]
    out_of_range: bool = False

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "out_of_range": self.out_of_range,
            "roots": [
                {
                    "job_id": job.job_id,
                    "tasks": [
                        {
                            "task_id": task.task_id,
                            "machines": [
                                {
                                    "machine_id": m.machine_id,
                                    "cpu_util": m.cpu_util,
                                    "mem_util": m.mem_util,
                                    "disk_util": m.disk_util,
                                }
                                for m in task.machines
                            ],
                        }
                        for task in job.tasks
                    ],
                }
                for job in self.roots
            ],
        }


def annuli_for(machine: MachineNode) -> list[AnnulusSpec]:
    """Three fixed-width rings per machine: cpu inner, mem middle, disk outer."""
    out = []
    for metric, (r0, r1) in zip(METRICS, _RING_BOUNDS):
        value = machine.value(metric)
        out.append(AnnulusSpec(metric, r0, r1, color_for(value), value))
    return out


def latest_value_at(store: TraceStore, machine_id: str, t: int) -> MachineNode:
    """Machine metrics from the newest sample at or before t, no older than
    one usage-resolution step; stale or missing data reads as absent."""
    series = store.usage.get(machine_id, [])
    ts = store.usage_timestamps.get(machine_id, [])
    idx = bisect_right(ts, t) - 1
    if idx < 0 or t - ts[idx] > store.manifest.usage_resolution_s:
        return MachineNode(machine_id, None, None, None)
    s = series[idx]
    return MachineNode(machine_id, s.cpu_util, s.mem_util, s.disk_util)


def build_snapshot(store: TraceStore, t: int) -> HierarchySnapshot:
    """Three-layer hierarchy of everything active at t, children id-sorted."""
    if not store.in_horizon(t):
        return HierarchySnapshot(t, (), out_of_range=True)
    roots = []
    for job_id in store.active_jobs_at(t):
        by_task: dict[str, set[str]] = {}
        for inst in store.instances_of_job(job_id):
            if inst.start_ts <= t and (inst.end_ts is None or inst.end_ts > t):
                by_task.setdefault(inst.task_id, set()).add(inst.machine_id)
        tasks = []
        for task_id in sorted(by_task):
            machines = tuple(
                latest_value_at(store, m, t) for m in sorted(by_task[task_id])
            )
            tasks.append(TaskNode(task_id, machines))
        roots.append(JobNode(job_id, tuple(tasks)))
    return HierarchySnapshot(t, tuple(roots))


# -- sibling packing (front-chain) ----------------------------------------


class _ChainNode:
    __slots__ = ("c", "next", "previous")

    def __init__(self, c: list[float]):
        self.c = c
        self.next: "_ChainNode" = self
        self.previous: "_ChainNode" = self


def _place(u: list[float], v: list[float], c: list[float]) -> None:
    """Position c tangent to circles u and v, on the outside of the chain."""
    dx, dy = u[0] - v[0], u[1] - v[1]
    d2 = dx * dx + dy * dy
    if d2:
        a2 = (v[2] + c[2]) ** 2
        b2 = (u[2] + c[2]) ** 2
        if a2 > b2:
            x = (d2 + b2 - a2) / (2 * d2)
            y = math.sqrt(max(0.0, b2 / d2 - x * x))
            c[0] = u[0] - x * dx - y * dy
            c[1] = u[1] - x * dy + y * dx
        else:
            x = (d2 + a2 - b2) / (2 * d2)
            y = math.sqrt(max(0.0, a2 / d2 - x * x))
            c[0] = v[0] + x * dx - y * dy
            c[1] = v[1] + x * dy + y * dx
    else:
        c[0] = v[0] + v[2] + c[2]
        c[1] = v[1]


def _intersects(a: list[float], b: list[float]) -> bool:
    dr = (a[2] + b[2]) * (1.0 - _PACK_SLACK)
    dx, dy = b[0] - a[0], b[1] - a[1]
    return dr > 0 and dr * dr > dx * dx + dy * dy


def _score(node: _ChainNode) -> float:
    a, b = node.c, node.next.c
    ab = a[2] + b[2]
    dx = (a[0] * b[2] + b[0] * a[2]) / ab
    dy = (a[1] * b[2] + b[1] * a[2]) / ab
    return dx * dx + dy * dy


def pack_siblings(radii: list[float]) -> list[Circle]:
    """Pack circles of the given radii so no pair overlaps beyond the slack.

    Placement is front-chain: the first circle sits at the origin, the
    second tangent on the +x axis, and each subsequent circle is placed
    tangent to the pair of chain circles closest to the centroid, walking
    the chain to resolve collisions. Purely deterministic in input order.
    """
    if any(r <= 0 for r in radii):
        raise ValueError("all radii must be > 0")
    n = len(radii)
    circles = [[0.0, 0.0, float(r)] for r in radii]
    if n == 0:
        return []
    if n >= 2:
        circles[1][0] = circles[0][2] + circles[1][2]
    if n >= 3:
        _place(circles[1], circles[0], circles[2])
    if n > 3:
        a = _ChainNode(circles[0])
        b = _ChainNode(circles[1])
        c = _ChainNode(circles[2])
        a.next = c.previous = b
        b.next = a.previous = c
        c.next = b.previous = a

        i = 3
        while i < n:
            cc = circles[i]
            _place(a.c, b.c, cc)
            c = _ChainNode(cc)

            # Walk the chain both ways for the nearest intersecting circle.
            j, k = b.next, a.previous
            sj, sk = b.c[2], a.c[2]
            repaired = False
            while True:
                if sj <= sk:
                    if _intersects(j.c, c.c):
                        b = j
                        a.next = b
                        b.previous = a
                        repaired = True
                        break
                    sj += j.c[2]
                    j = j.next
                else:
                    if _intersects(k.c, c.c):
                        a = k
                        a.next = b
                        b.previous = a
                        repaired = True
                        break
                    sk += k.c[2]
                    k = k.previous
                if j is k.next:
                    break
            if repaired:
                continue

            c.previous = a
            c.next = b
            a.next = b.previous = c

            # Next insertion point: chain pair closest to the origin.
            b = a
            aa = _score(a)
            node = c
            while True:
                node = node.next
                if node is b:
                    break
                ca = _score(node)
                if ca < aa:
                    a, aa = node, ca
            b = a.next
            i += 1

    return [Circle(c[0], c[1], c[2]) for c in circles]


# -- minimal enclosing circle ----------------------------------------------


def _lcg_shuffle(items: list) -> list:
    """Fisher-Yates with a fixed linear congruential generator, so the
    enclosing-circle search order is deterministic for identical inputs."""
    out = list(items)
    state = 1
    for m in range(len(out) - 1, 0, -1):
        state = (1664525 * state + 1013904223) % 4294967296
        i = int(state / 4294967296 * (m + 1))
        out[m], out[i] = out[i], out[m]
    return out


def _encloses_not(a: Circle, b: Circle) -> bool:
    dr = a.r - b.r
    dx, dy = b.cx - a.cx, b.cy - a.cy
    return dr < 0 or dr * dr < dx * dx + dy * dy


def _encloses_weak(a: Circle, b: Circle) -> bool:
    dr = a.r - b.r + max(a.r, b.r, 1.0) * 1e-9
    dx, dy = b.cx - a.cx, b.cy - a.cy
    return dr > 0 and dr * dr > dx * dx + dy * dy


def _encloses_weak_all(a: Circle, basis: list[Circle]) -> bool:
    return all(_encloses_weak(a, b) for b in basis)


def _basis_circle_2(a: Circle, b: Circle) -> Circle:
    x21, y21, r21 = b.cx - a.cx, b.cy - a.cy, b.r - a.r
    length = math.sqrt(x21 * x21 + y21 * y21)
    if length == 0.0:
        return a if a.r >= b.r else b
    return Circle(
        (a.cx + b.cx + x21 / length * r21) / 2,
        (a.cy + b.cy + y21 / length * r21) / 2,
        (length + a.r + b.r) / 2,
    )


def _basis_circle_3(a: Circle, b: Circle, c: Circle) -> Circle:
    x1, y1, r1 = a.cx, a.cy, a.r
    x2, y2, r2 = b.cx, b.cy, b.r
    x3, y3, r3 = c.cx, c.cy, c.r
    a2, b2, c2 = x1 - x2, y1 - y2, r2 - r1
    d2 = x1 * x1 + y1 * y1 - r1 * r1 - x2 * x2 - y2 * y2 + r2 * r2
    a3, b3, c3 = x1 - x3, y1 - y3, r3 - r1
    d3 = x1 * x1 + y1 * y1 - r1 * r1 - x3 * x3 - y3 * y3 + r3 * r3
    ab = a3 * b2 - a2 * b3
    xa = (b2 * d3 - b3 * d2) / (ab * 2) - x1
    xb = (b3 * c2 - b2 * c3) / ab
    ya = (a3 * d2 - a2 * d3) / (ab * 2) - y1
    yb = (a2 * c3 - a3 * c2) / ab
    A = xb * xb + yb * yb - 1
    B = 2 * (r1 + xa * xb + ya * yb)
    C = xa * xa + ya * ya - r1 * r1
    r = -((B + math.sqrt(max(0.0, B * B - 4 * A * C))) / (2 * A) if abs(A) > 1e-6 else C / B)
    return Circle(x1 + xa + xb * r, y1 + ya + yb * r, r)


def _enclose_basis(basis: list[Circle]) -> Circle:
    if len(basis) == 1:
        return basis[0]
    if len(basis) == 2:
        return _basis_circle_2(basis[0], basis[1])
    return _basis_circle_3(basis[0], basis[1], basis[2])


def _extend_basis(basis: list[Circle], p: Circle) -> list[Circle]:
    if _encloses_weak_all(p, basis):
        return [p]
    for bi in basis:
        if _encloses_not(p, bi) and _encloses_weak_all(_basis_circle_2(bi, p), basis):
            return [bi, p]
    for i in range(len(basis) - 1):
        for j in range(i + 1, len(basis)):
            bi, bj = basis[i], basis[j]
            if (
                _encloses_not(_basis_circle_2(bi, bj), p)
                and _encloses_not(_basis_circle_2(bi, p), bj)
                and _encloses_not(_basis_circle_2(bj, p), bi)
                and _encloses_weak_all(_basis_circle_3(bi, bj, p), basis)
            ):
                return [bi, bj, p]
    raise ArithmeticError("enclosing-circle basis update failed")


def enclosing_circle(circles: list[Circle]) -> Circle:
    """Smallest circle containing every input circle (move-to-front search)."""
    if not circles:
        raise ValueError("enclosing_circle of empty input")
    order = _lcg_shuffle(circles)
    basis: list[Circle] = []
    e: Circle | None = None
    i = 0
    while i < len(order):
        p = order[i]
        if e is not None and _encloses_weak(e, p):
            i += 1
        else:
            basis = _extend_basis(basis, p)
            e = _enclose_basis(basis)
            i = 0
    assert e is not None
    return e


# -- full layout -------------------------------------------------------------


@dataclass(frozen=True)
class LayoutStyle:
    machine_radius: float = 10.0
    task_padding: float = 0.15
    job_padding: float = 0.15
    root_spacing: float = 0.25

    def __post_init__(self):
        for name in ("machine_radius", "task_padding", "job_padding", "root_spacing"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class LayoutNode:
    id: str
    kind: str  # job | task | machine
    circle: Circle
    annuli: list[AnnulusSpec] = field(default_factory=list)
    children: list["LayoutNode"] = field(default_factory=list)

    def translated(self, dx: float, dy: float) -> "LayoutNode":
        return LayoutNode(
            self.id,
            self.kind,
            Circle(self.circle.cx + dx, self.circle.cy + dy, self.circle.r),
            self.annuli,
            [child.translated(dx, dy) for child in self.children],
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "cx": self.circle.cx,
            "cy": self.circle.cy,
            "r": self.circle.r,
            "annuli": [
                {
                    "metric": a.metric,
                    "r0": a.r_inner_frac,
                    "r1": a.r_outer_frac,
                    "color": a.color.hex,
                    "value": a.value,
                }
                for a in self.annuli
            ],
            "children": [child.to_dict() for child in self.children],
        }


@dataclass
class LayoutTree:
    timestamp: int
    roots: list[LayoutNode]
    out_of_range: bool = False

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "out_of_range": self.out_of_range,
            "roots": [node.to_dict() for node in self.roots],
        }


def _pack_in_size_order(ids: list[str], radii: dict[str, float]) -> dict[str, Circle]:
    """Pack siblings largest-first (ties by id); returns id -> position."""
    order = sorted(ids, key=lambda i: (-radii[i], i))
    packed = pack_siblings([radii[i] for i in order])
    return dict(zip(order, packed))


def _layout_task(task: TaskNode, style: LayoutStyle) -> LayoutNode:
    ids = [m.machine_id for m in task.machines]
    positions = _pack_in_size_order(ids, {i: style.machine_radius for i in ids})
    children = [
        LayoutNode(m.machine_id, "machine", positions[m.machine_id], annuli_for(m))
        for m in task.machines
    ]
    enclosure = enclosing_circle([c.circle for c in children])
    circle = Circle(enclosure.cx, enclosure.cy, enclosure.r * (1.0 + style.task_padding))
    return LayoutNode(task.task_id, "task", circle, [], children)


def _layout_job(job: JobNode, style: LayoutStyle) -> LayoutNode:
    tasks = [_layout_task(task, style) for task in job.tasks]
    positions = _pack_in_size_order(
        [t.id for t in tasks], {t.id: t.circle.r for t in tasks}
    )
    placed = []
    for t in tasks:
        target = positions[t.id]
        placed.append(t.translated(target.cx - t.circle.cx, target.cy - t.circle.cy))
    enclosure = enclosing_circle([t.circle for t in placed])
    circle = Circle(enclosure.cx, enclosure.cy, enclosure.r * (1.0 + style.job_padding))
    return LayoutNode(job.job_id, "job", circle, [], placed)


def layout_snapshot(snapshot: HierarchySnapshot, style: LayoutStyle | None = None) -> LayoutTree:
    """Geometric realization of a snapshot; see module docstring for rules."""
    style = style or LayoutStyle()
    jobs = [_layout_job(job, style) for job in snapshot.roots]
    if not jobs:
        return LayoutTree(snapshot.timestamp, [], snapshot.out_of_range)
    spaced = {j.id: j.circle.r * (1.0 + style.root_spacing) for j in jobs}
    positions = _pack_in_size_order([j.id for j in jobs], spaced)
    placed = []
    for j in jobs:
        target = positions[j.id]
        placed.append(j.translated(target.cx - j.circle.cx, target.cy - j.circle.cy))
    return LayoutTree(snapshot.timestamp, placed, snapshot.out_of_range)
