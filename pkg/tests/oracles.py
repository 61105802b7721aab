"""Independent reference implementations used to check the real ones.

Everything here is deliberately written the dumb way: exhaustive scans,
dense grid searches, and a from-scratch LTTB. Nothing imports the
corresponding production code paths it is checking.
"""
from __future__ import annotations

import math

import numpy as np


def brute_force_active_jobs(instances, t: int) -> list[str]:
    """Scan every instance record; half-open [start, end) activity."""
    active = set()
    for inst in instances:
        if inst.start_ts <= t and (inst.end_ts is None or inst.end_ts > t):
            active.add(inst.job_id)
    return sorted(active)


def brute_force_multi_job_machines(instances, t: int) -> dict[str, list[str]]:
    by_machine: dict[str, set[str]] = {}
    for inst in instances:
        if inst.start_ts <= t and (inst.end_ts is None or inst.end_ts > t):
            by_machine.setdefault(inst.machine_id, set()).add(inst.job_id)
    return {m: sorted(jobs) for m, jobs in sorted(by_machine.items()) if len(jobs) >= 2}


def brute_force_timeline(samples, metric_attr: str, resolution_s: int):
    """(step, mean, min, max) tuples from a flat scan over all samples."""
    buckets: dict[int, list[float]] = {}
    for s in samples:
        buckets.setdefault((s.timestamp // resolution_s) * resolution_s, []).append(
            getattr(s, metric_attr))
    return [
        (step, sum(vs) / len(vs), min(vs), max(vs)) for step, vs in sorted(buckets.items())
    ]


def grid_search_enclosing_radius(circles, levels: int = 6, grid: int = 81) -> float:
    """Smallest enclosing-circle radius by iteratively refined grid search.

    The radius needed from a center c is max_i(|c - c_i| + r_i), a convex
    function, so zooming the grid around the best cell converges to the
    global optimum.
    """
    cx = np.array([c.cx for c in circles])
    cy = np.array([c.cy for c in circles])
    r = np.array([c.r for c in circles])
    x_lo, x_hi = float(np.min(cx - r)), float(np.max(cx + r))
    y_lo, y_hi = float(np.min(cy - r)), float(np.max(cy + r))
    half_w = max(x_hi - x_lo, y_hi - y_lo, 1e-9) / 2
    best_x, best_y = (x_lo + x_hi) / 2, (y_lo + y_hi) / 2
    best_r = math.inf
    for _ in range(levels):
        xs = np.linspace(best_x - half_w, best_x + half_w, grid)
        ys = np.linspace(best_y - half_w, best_y + half_w, grid)
        gx, gy = np.meshgrid(xs, ys)
        need = np.max(
            np.hypot(gx[..., None] - cx, gy[..., None] - cy) + r, axis=-1
        )
        idx = np.unravel_index(np.argmin(need), need.shape)
        best_r = float(need[idx])
        best_x, best_y = float(gx[idx]), float(gy[idx])
        # Keep the next window generously wider than the last cell size.
        half_w = 3 * (2 * half_w / (grid - 1))
    return best_r


def reference_lttb(points, threshold: int):
    """Largest-triangle-three-buckets, written bucket-list first.

    Bucket boundaries follow the standard formulation: interior points are
    split into threshold-2 buckets of size (n-2)/(threshold-2), the first
    and last points are kept verbatim, and each bucket contributes the
    point forming the largest triangle with the previous selection and the
    next bucket's average.
    """
    n = len(points)
    if n <= threshold:
        return list(points)
    every = (n - 2) / (threshold - 2)
    # threshold-1 interior buckets; the last one is only ever averaged over,
    # candidates are drawn from the first threshold-2.
    buckets = []
    for k in range(threshold - 1):
        lo = math.floor(k * every) + 1
        hi = min(math.floor((k + 1) * every) + 1, n)
        buckets.append(list(points[lo:hi]))

    def triangle_area(a, b, c):
        return abs((a[0] - c[0]) * (b[1] - a[1]) - (a[0] - b[0]) * (c[1] - a[1])) / 2.0

    selected = [points[0]]
    prev = points[0]
    for i in range(threshold - 2):
        nxt = buckets[i + 1]
        avg = (sum(p[0] for p in nxt) / len(nxt), sum(p[1] for p in nxt) / len(nxt))
        best = None
        best_area = -1.0
        for p in buckets[i]:
            area = triangle_area(prev, p, avg)
            if area > best_area:
                best_area = area
                best = p
        selected.append(best)
        prev = best
    selected.append(points[-1])
    return selected
