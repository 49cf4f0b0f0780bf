"""Built-in swarm tasks: boustrophedon area search, synchronized target
tracking, and Voronoi/Lloyd space coverage.

Coverage runs in 2D at a fixed altitude. Voronoi cells are built by
clipping the rectangular region with one perpendicular-bisector half-plane
per competing site (O(n^2), fine for swarms of up to 64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import assign_slots
from .formation import FormationSpec
from .world import UavState


@dataclass
class Rect:
    """2D axis-aligned rectangle [x0, x1] x [y0, y1], meters."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def corners(self) -> np.ndarray:
        return np.array(
            [[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]]
        )

    def contains(self, p) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1


@dataclass
class SearchTask:
    center: np.ndarray
    radius: float
    lane_spacing: float
    formation: FormationSpec

    def __post_init__(self) -> None:
        self.center = np.asarray(self.center, dtype=float)
        if self.radius <= 0 or self.lane_spacing <= 0:
            raise ValueError("search radius and lane spacing must be positive")


@dataclass
class TrackTask:
    target_id: int
    perception_range: float = 150.0
    standoff_radius: float = 10.0

    def __post_init__(self) -> None:
        if not self.perception_range > self.standoff_radius > 0:
            raise ValueError("need perception_range > standoff_radius > 0")


@dataclass
class CoverageTask:
    region: Rect
    tolerance: float = 0.5
    max_iters: int = 200

    def __post_init__(self) -> None:
        if self.region.area <= 0:
            raise ValueError("coverage region must have positive area")
        if self.tolerance <= 0:
            raise ValueError("coverage tolerance must be positive")


def plan_area_search(task: SearchTask) -> list[np.ndarray]:
    """Lawnmower lanes over the search disk, alternating direction.

    Lanes run along x at y = k*lane_spacing (|y| < radius), visited in
    increasing y; each lane spans the disk chord at that height. A disk
    smaller than half a lane spacing degenerates to the center point.
    """
    c = task.center
    r = task.radius
    if r < task.lane_spacing / 2.0:
        return [c.copy()]
    k_max = math.ceil(r / task.lane_spacing) - 1
    waypoints: list[np.ndarray] = []
    leftward = False
    for k in range(-k_max, k_max + 1):
        y = k * task.lane_spacing
        if abs(y) >= r:
            continue
        half_chord = math.sqrt(r * r - y * y)
        xs = (half_chord, -half_chord) if leftward else (-half_chord, half_chord)
        for x in xs:
            waypoints.append(c + np.array([x, y, 0.0]))
        leftward = not leftward
    return waypoints


def update_tracking(
    trackers: list[UavState], target: UavState, task: TrackTask
) -> dict[int, np.ndarray] | None:
    """Standoff points around the target once ANY tracker perceives it.

    Detection is broadcast: one tracker in range switches the whole group
    to tracking in the same tick. Returns tracker id -> desired point, or
    None while the target is outside everyone's perception range.
    """
    if not trackers:
        raise ValueError("tracker group is empty")
    in_range = any(
        float(np.linalg.norm(t.position - target.position)) <= task.perception_range
        for t in trackers
    )
    if not in_range:
        return None
    slots = standoff_slots(target.position, task.standoff_radius, len(trackers))
    perm = assign_slots([t.position for t in trackers], slots)
    return {t.id: slots[perm[i]] for i, t in enumerate(trackers)}


def standoff_slots(center: np.ndarray, radius: float, count: int) -> list[np.ndarray]:
    """Equally spaced points on the horizontal standoff circle."""
    return [
        np.asarray(center, dtype=float)
        + radius * np.array([math.cos(2 * math.pi * i / count), math.sin(2 * math.pi * i / count), 0.0])
        for i in range(count)
    ]


# --- Voronoi partition and Lloyd relaxation -------------------------------

# Deterministic nudge applied to duplicated sites before partitioning.
_DUP_EPS = 1e-9


def _dedupe_sites(sites: np.ndarray) -> np.ndarray:
    out = sites.copy()
    seen: dict[tuple[float, float], int] = {}
    for i in range(len(out)):
        key = (float(out[i, 0]), float(out[i, 1]))
        bump = 0
        while key in seen:
            bump += 1
            out[i, 0] += _DUP_EPS * (i + 1)
            out[i, 1] += _DUP_EPS * bump
            key = (float(out[i, 0]), float(out[i, 1]))
        seen[key] = i
    return out


def _clip_half_plane(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to {q : a.q <= b}."""
    if len(poly) == 0:
        return poly
    out: list[np.ndarray] = []
    m = len(poly)
    d = poly @ a - b
    for i in range(m):
        j = (i + 1) % m
        inside_i = d[i] <= 0.0
        inside_j = d[j] <= 0.0
        if inside_i:
            out.append(poly[i])
        if inside_i != inside_j:
            t = d[i] / (d[i] - d[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out) if out else np.empty((0, 2))


def voronoi_partition(sites, region: Rect) -> list[np.ndarray]:
    """Voronoi cells of the sites clipped to the region.

    Cell i is the set of region points at least as close to site i as to
    any other site; cells tile the region. Duplicate sites are nudged by
    a fixed deterministic offset first.
    """
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    pts = _dedupe_sites(pts)
    cells: list[np.ndarray] = []
    base = region.corners()
    for i, s in enumerate(pts):
        poly = base
        for j, t in enumerate(pts):
            if j == i:
                continue
            # Half-plane of points closer to s than to t:
            # (t - s) . q <= (t - s) . midpoint
            a = t - s
            b = float(a @ ((s + t) / 2.0))
            poly = _clip_half_plane(poly, a, b)
            if len(poly) == 0:
                break
        cells.append(poly)
    return cells


def polygon_area_centroid(poly: np.ndarray) -> tuple[float, np.ndarray]:
    """Area and centroid of a simple polygon (shoelace)."""
    if len(poly) < 3:
        return 0.0, poly.mean(axis=0) if len(poly) else np.zeros(2)
    x = poly[:, 0]
    y = poly[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    if a == 0.0:
        return 0.0, poly.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return float(abs(a)), np.array([cx, cy])


def lloyd_step(sites, region: Rect) -> np.ndarray:
    """One Lloyd relaxation: every site moves to its cell's area centroid."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    cells = voronoi_partition(pts, region)
    out = pts.copy()
    for i, cell in enumerate(cells):
        area, centroid = polygon_area_centroid(cell)
        if area > 0.0:
            out[i] = centroid
    return out


def lloyd_relax(sites, region: Rect, tolerance: float, max_iters: int) -> tuple[np.ndarray, int]:
    """Iterate lloyd_step until max site displacement < tolerance."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    for it in range(max_iters):
        nxt = lloyd_step(pts, region)
        moved = float(np.max(np.linalg.norm(nxt - pts, axis=1))) if len(pts) else 0.0
        pts = nxt
        if moved < tolerance:
            return pts, it + 1
    return pts, max_iters
