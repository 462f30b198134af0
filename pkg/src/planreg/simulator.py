"""Deterministic 2D grid simulator for plan-guided rescue missions.

The world is a cell grid rasterized from a floor plan: walls are the room
outlines, doorways are carved openings that may be secretly closed, and
targets wait inside rooms. A simulated robot with a 360-degree range
sensor and noisy unicycle odometry builds a tri-state occupancy map and
either follows the floor plan (registering the map onto the plan, then
planning straight through rooms it has never seen) or explores frontiers
like a plain SLAM system.

Everything is seeded and iteration orders are fixed, so a rerun with the
same inputs produces bit-identical mission logs; mission time is
simulated (travel at configured speed plus a fixed cost per registration)
rather than measured.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import floorplan as fp
from . import raster, registration
from .errors import (EmptyStructureError, InvalidPoseError, LocalizationError,
                     NoMatchError, SchemaError, UnreachableGoalError)
from .pgm import FREE_CELL, OCCUPIED_CELL, UNKNOWN_CELL

# World grid codes.
W_FREE = 0
W_WALL = 1
W_DOOR = 2

WORLD_MARGIN = 3  # free cells padded around the rasterized plan

_SQRT2 = math.sqrt(2.0)
# 8-connected neighborhood in fixed scan order: orthogonals then diagonals.
_NEIGHBORS = ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True)
class Pose:
    """Robot pose in world cell coordinates (x = col, y = row, radians)."""

    x: float
    y: float
    heading: float = 0.0

    def cell(self) -> tuple[int, int]:
        return (int(math.floor(self.y)), int(math.floor(self.x)))


@dataclass(frozen=True)
class MotionConfig:
    """Robot, sensor, and mission-bookkeeping parameters.

    Distances are in cells, times in seconds, angles in radians.
    relocation_distance is the travel budget D between forced
    re-registrations; registration_cost_s is the simulated time charged
    for each registration so logs stay byte-reproducible.
    """

    speed: float = 3.0
    noise_sigma_xy: float = 0.02
    noise_sigma_heading: float = 0.0
    relocation_distance: float = 25.0
    rng_seed: int = 0
    dt: float = 1.0
    n_beams: int = 180
    max_range: float = 40.0
    sample_step: float = 0.25
    localize_radius: int = 2
    localize_window: int = 20
    target_radius: float = 10.0
    min_component: int = 50
    registration_cost_s: float = 0.5


class Target(NamedTuple):
    x: float
    y: float
    room: str


@dataclass(frozen=True)
class Door:
    id: str
    from_room: str
    to_room: str
    segment: tuple[tuple[float, float], tuple[float, float]]  # plan units
    closed: bool


@dataclass(frozen=True)
class World:
    """Rasterized ground truth: grid, doors, targets, start pose."""

    plan: fp.FloorPlan
    resolution: float  # cells per plan unit
    grid: np.ndarray = field(repr=False)           # int8, W_* codes
    blocked: np.ndarray = field(repr=False)        # bool, walls + closed doors
    room_labels: np.ndarray = field(repr=False)    # int16, 0 = none, i+1 = rooms[i]
    doors: tuple[Door, ...]
    door_cells: dict = field(repr=False)           # id -> (N, 2) row/col array
    targets: tuple[Target, ...]
    start: Pose

    def plan_to_world(self, x: float, y: float) -> tuple[float, float]:
        """Map plan-unit coordinates to world cell coordinates."""
        x0, y0, _, _ = self.plan.bounds()
        return ((x - x0) * self.resolution + WORLD_MARGIN,
                (y - y0) * self.resolution + WORLD_MARGIN)

    def world_to_plan(self, x: float, y: float) -> tuple[float, float]:
        """Map world cell coordinates back to plan units."""
        x0, y0, _, _ = self.plan.bounds()
        return ((x - WORLD_MARGIN) / self.resolution + x0,
                (y - WORLD_MARGIN) / self.resolution + y0)

    def room_at(self, pose: Pose) -> str | None:
        r, c = pose.cell()
        h, w = self.room_labels.shape
        if not (0 <= r < h and 0 <= c < w):
            return None
        label = int(self.room_labels[r, c])
        return self.plan.rooms[label - 1].name if label else None


def _line_cells(p0: tuple[float, float], p1: tuple[float, float]) -> list[tuple[int, int]]:
    """Bresenham cells (row, col) from p0 to p1 given as (x, y)."""
    cells: list[tuple[int, int]] = []
    x0, y0 = int(round(p0[0])), int(round(p0[1]))
    x1, y1 = int(round(p1[0])), int(round(p1[1]))
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx, sy = (1 if x0 < x1 else -1), (1 if y0 < y1 else -1)
    err = dx + dy
    while True:
        cells.append((y0, x0))
        if x0 == x1 and y0 == y1:
            return cells
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def build_world(plan: fp.FloorPlan, doors: list[Door], targets: list[Target],
                start: Pose, resolution: float) -> World:
    """Rasterize a plan plus door/target annotations into a World.

    Door and target coordinates arrive in plan units and are converted
    here; the returned World speaks cell coordinates only.
    """
    w_units, h_units = plan.size()
    gw = int(math.ceil(w_units * resolution)) + 2 * WORLD_MARGIN
    gh = int(math.ceil(h_units * resolution)) + 2 * WORLD_MARGIN
    x0, y0, _, _ = plan.bounds()

    def to_world(pt) -> tuple[float, float]:
        return ((pt[0] - x0) * resolution + WORLD_MARGIN,
                (pt[1] - y0) * resolution + WORLD_MARGIN)

    walls = np.zeros((gh, gw), dtype=np.uint8)
    for room in plan.rooms:
        raster.draw_polygon_edges(walls, [to_world(p) for p in room.outline], 1)

    door_cells: dict[str, np.ndarray] = {}
    door_union = np.zeros_like(walls)
    for door in doors:
        region = np.zeros_like(walls)
        for (r, c) in _line_cells(to_world(door.segment[0]), to_world(door.segment[1])):
            region[max(0, r - 1):r + 2, max(0, c - 1):c + 2] = 1
        region &= walls
        cells = np.argwhere(region)
        if cells.size == 0:
            raise SchemaError(f"door {door.id!r} does not touch a wall")
        door_cells[door.id] = cells
        door_union |= region

    grid = np.zeros((gh, gw), dtype=np.int8)
    grid[(walls == 1) & (door_union == 0)] = W_WALL
    grid[door_union == 1] = W_DOOR

    blocked = grid == W_WALL
    for door in doors:
        if door.closed:
            cells = door_cells[door.id]
            blocked[cells[:, 0], cells[:, 1]] = True

    room_labels = np.zeros((gh, gw), dtype=np.int16)
    for i, room in enumerate(plan.rooms):
        filled = raster.fill_polygon((gh, gw), [to_world(p) for p in room.outline])
        room_labels[(filled == 1) & (room_labels == 0)] = i + 1

    world_targets = tuple(Target(*to_world((t.x, t.y)), t.room) for t in targets)
    sx, sy = to_world((start.x, start.y))
    world_start = Pose(sx, sy, start.heading)

    world = World(plan=plan, resolution=resolution, grid=grid, blocked=blocked,
                  room_labels=room_labels, doors=tuple(doors),
                  door_cells=door_cells, targets=world_targets, start=world_start)
    r, c = world_start.cell()
    if not (0 <= r < gh and 0 <= c < gw) or blocked[r, c]:
        raise SchemaError("start pose is outside the grid or inside a wall")
    for tgt in world_targets:
        if blocked[int(tgt.y), int(tgt.x)]:
            raise SchemaError(f"target in room {tgt.room!r} lies inside a wall")
    return world


def world_from_dict(doc: dict) -> World:
    """Validate and build a World from a decoded world JSON document."""
    if not isinstance(doc, dict):
        raise SchemaError("world document must be a JSON object")
    plan = fp.plan_from_dict(doc.get("plan"))
    res = doc.get("resolution_cells_per_unit")
    if not isinstance(res, (int, float)) or res <= 0:
        raise SchemaError("resolution_cells_per_unit must be a positive number")
    names = {room.name for room in plan.rooms}

    doors = []
    for i, entry in enumerate(doc.get("doors", [])):
        try:
            seg = entry["segment"]
            door = Door(id=str(entry["id"]), from_room=str(entry["from"]),
                        to_room=str(entry["to"]),
                        segment=((float(seg[0][0]), float(seg[0][1])),
                                 (float(seg[1][0]), float(seg[1][1]))),
                        closed=bool(entry.get("closed", False)))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise SchemaError(f"doors[{i}] malformed: {exc}") from exc
        if door.from_room not in names or door.to_room not in names:
            raise SchemaError(f"doors[{i}] references unknown rooms")
        doors.append(door)

    targets = []
    for i, entry in enumerate(doc.get("targets", [])):
        try:
            targets.append(Target(float(entry["x"]), float(entry["y"]),
                                  str(entry["room"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"targets[{i}] malformed: {exc}") from exc
        if targets[-1].room not in names:
            raise SchemaError(f"targets[{i}] references unknown room")
    if not targets:
        raise SchemaError("world needs at least one target")

    start = doc.get("start")
    if not isinstance(start, dict):
        raise SchemaError("world needs a start pose")
    try:
        start_pose = Pose(float(start["x"]), float(start["y"]),
                          float(start.get("heading", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"start pose malformed: {exc}") from exc

    return build_world(plan, doors, targets, start_pose, float(res))


def parse_world(text: str) -> World:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"world is not valid JSON: {exc}") from exc
    return world_from_dict(doc)


def load_world(path) -> World:
    return parse_world(Path(path).read_text())


# === sensing ===

class ScanResult(NamedTuple):
    angles: np.ndarray  # (B,) beam angles, radians
    ranges: np.ndarray  # (B,) hit distance or max_range
    hits: np.ndarray    # (B,) bool, True when the beam hit structure


def _beam_samples(pose_x: float, pose_y: float, angles: np.ndarray,
                  max_range: float, step: float):
    """Sample points along each beam at t = step, 2*step, ... <= max_range."""
    n = int(max_range / step)
    t = (np.arange(n, dtype=np.float64) + 1.0) * step
    xs = pose_x + np.cos(angles)[:, None] * t[None, :]
    ys = pose_y + np.sin(angles)[:, None] * t[None, :]
    return t, xs, ys


def raycast_scan(world: World, pose: Pose, n_beams: int = 180,
                 max_range: float = 40.0, step: float = 0.25) -> ScanResult:
    """Cast a full circle of beams and return first-hit ranges.

    Beams are sampled at a constant sub-cell step; a beam terminates at
    the first sample landing in a blocked cell (wall or closed door),
    else at max_range. Out-of-grid samples never block.

    Raises:
        InvalidPoseError: Pose outside the grid or inside a blocked cell.
    """
    blocked = world.blocked
    h, w = blocked.shape
    r, c = pose.cell()
    if not (0 <= r < h and 0 <= c < w) or blocked[r, c]:
        raise InvalidPoseError(f"scan pose ({pose.x:.2f}, {pose.y:.2f}) is blocked")
    angles = pose.heading + 2.0 * np.pi * np.arange(n_beams) / n_beams
    t, xs, ys = _beam_samples(pose.x, pose.y, angles, max_range, step)
    rows = np.floor(ys).astype(np.int64)
    cols = np.floor(xs).astype(np.int64)
    inside = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    hit = np.zeros_like(inside)
    hit[inside] = blocked[rows[inside], cols[inside]]
    first = np.argmax(hit, axis=1)
    any_hit = hit.any(axis=1)
    ranges = np.where(any_hit, t[first], max_range)
    return ScanResult(angles=angles, ranges=ranges, hits=any_hit)


def line_of_sight(world: World, p: tuple[float, float], q: tuple[float, float],
                  step: float = 0.25) -> bool:
    """True when the segment p-q crosses no blocked cell (endpoints' own
    cells excluded via the sub-cell sampling)."""
    dist = math.hypot(q[0] - p[0], q[1] - p[1])
    if dist < step:
        return True
    n = int(dist / step)
    t = (np.arange(n) + 1.0) * step
    xs = p[0] + (q[0] - p[0]) / dist * t
    ys = p[1] + (q[1] - p[1]) / dist * t
    rows = np.floor(ys).astype(np.int64)
    cols = np.floor(xs).astype(np.int64)
    h, w = world.blocked.shape
    inside = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    return not world.blocked[rows[inside], cols[inside]].any()


# === mapping ===

def integrate_scan(occupancy: np.ndarray, pose_est: Pose, scan: ScanResult,
                   max_range: float = 40.0, step: float = 0.25) -> np.ndarray:
    """Fuse one scan into a tri-state occupancy grid, in place.

    Cells traversed by a beam become free and the hit cell becomes
    occupied, but occupied cells latch: a beam grazing the corner of a
    wall cell must not erase the wall, or the map flickers between
    contradictory states from one scan to the next. Known cells never
    revert to unknown. The scan is replayed from the *estimated* pose,
    so odometry error smears the map exactly as it would on a robot.
    """
    h, w = occupancy.shape
    t, xs, ys = _beam_samples(pose_est.x, pose_est.y, scan.angles, max_range, step)
    free_sel = t[None, :] < scan.ranges[:, None]
    rows = np.floor(ys).astype(np.int64)
    cols = np.floor(xs).astype(np.int64)
    inside = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    sel = free_sel & inside
    rr, cc = rows[sel], cols[sel]
    keep = occupancy[rr, cc] != OCCUPIED_CELL
    occupancy[rr[keep], cc[keep]] = FREE_CELL

    hit_idx = np.flatnonzero(scan.hits)
    if hit_idx.size:
        hx = pose_est.x + np.cos(scan.angles[hit_idx]) * scan.ranges[hit_idx]
        hy = pose_est.y + np.sin(scan.angles[hit_idx]) * scan.ranges[hit_idx]
        hr = np.floor(hy).astype(np.int64)
        hc = np.floor(hx).astype(np.int64)
        ok = (hr >= 0) & (hr < h) & (hc >= 0) & (hc < w)
        occupancy[hr[ok], hc[ok]] = OCCUPIED_CELL

    pr, pc = pose_est.cell()
    if 0 <= pr < h and 0 <= pc < w:
        occupancy[pr, pc] = FREE_CELL
    return occupancy


# === motion ===

def step_motion(pose: Pose, u: tuple[float, float], dt: float,
                cfg: MotionConfig, rng: np.random.Generator) -> Pose:
    """One unicycle step with seeded Gaussian noise.

    u = (v, omega): forward speed and turn rate. The update is the
    standard Euler unicycle with independent Gaussian noise on position
    and heading; noise draws happen unconditionally so the random stream
    advances identically whatever the sigmas are.
    """
    v, omega = u
    eps_x = rng.normal(0.0, cfg.noise_sigma_xy)
    eps_y = rng.normal(0.0, cfg.noise_sigma_xy)
    eps_h = rng.normal(0.0, cfg.noise_sigma_heading)
    x = pose.x + v * math.cos(pose.heading) * dt + eps_x
    y = pose.y + v * math.sin(pose.heading) * dt + eps_y
    heading = (pose.heading + omega * dt + eps_h + math.pi) % (2 * math.pi) - math.pi
    return Pose(x, y, heading)


# === planning ===

def _astar(traversable: np.ndarray, start: tuple[int, int],
           goal: tuple[int, int], use_heuristic: bool) -> tuple[dict, dict]:
    """Shared A*/Dijkstra relaxation; returns (cost, parent) maps."""
    h, w = traversable.shape
    gy, gx = goal
    dist: dict[tuple[int, int], float] = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    counter = 0
    heap: list[tuple[float, int, tuple[int, int]]] = [(0.0, 0, start)]
    while heap:
        f, _, cell = heapq.heappop(heap)
        r, c = cell
        base = dist.get(cell)
        if base is None:
            continue
        est = math.hypot(gy - r, gx - c) if use_heuristic else 0.0
        if f > base + est + 1e-12:
            continue  # stale entry
        if cell == goal:
            break
        for dr, dc in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or not traversable[nr, nc]:
                continue
            if dr and dc and not (traversable[r + dr, c] and traversable[r, c + dc]):
                continue  # no squeezing diagonally between blocked cells
            cost = base + (_SQRT2 if dr and dc else 1.0)
            if cost < dist.get((nr, nc), math.inf) - 1e-12:
                dist[(nr, nc)] = cost
                parent[(nr, nc)] = cell
                counter += 1
                hcost = math.hypot(gy - nr, gx - nc) if use_heuristic else 0.0
                heapq.heappush(heap, (cost + hcost, counter, (nr, nc)))
    return dist, parent


def plan_path(traversable: np.ndarray, start: tuple[int, int],
              goal: tuple[int, int]) -> list[tuple[int, int]]:
    """8-connected A* path over a boolean grid.

    Straight moves cost 1, diagonal moves sqrt(2), the heuristic is the
    Euclidean distance, and diagonal moves may not cut corners past
    blocked cells. Expansion order is fixed, so results are
    deterministic.

    Args:
        traversable: Boolean grid, True where the robot may stand.
        start: (row, col) start cell; must be traversable.
        goal: (row, col) goal cell.

    Returns:
        Cell list from start to goal inclusive.

    Raises:
        UnreachableGoalError: No route exists.
    """
    h, w = traversable.shape
    for name, (r, c) in (("start", start), ("goal", goal)):
        if not (0 <= r < h and 0 <= c < w):
            raise UnreachableGoalError(f"{name} cell {(r, c)} outside grid")
    if not traversable[start]:
        raise UnreachableGoalError(f"start cell {start} is blocked")
    if not traversable[goal]:
        raise UnreachableGoalError(f"goal cell {goal} is blocked")
    if start == goal:
        return [start]
    dist, parent = _astar(traversable, start, goal, use_heuristic=True)
    if goal not in dist:
        raise UnreachableGoalError(f"no path from {start} to {goal}")
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def dijkstra_field(traversable: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    """Cost-to-reach field from `start` over the whole grid (inf = unreachable)."""
    dist, _ = _astar(traversable, start, (-1, -1), use_heuristic=False)
    field_arr = np.full(traversable.shape, np.inf)
    for (r, c), v in dist.items():
        field_arr[r, c] = v
    return field_arr


# === localization ===

def localize(patch: np.ndarray, patch_origin: tuple[int, int],
             walls: np.ndarray, prior: Pose, radius: int = 5) -> Pose:
    """Correct a pose by correlating observed structure with map walls.

    The patch (occupied cells around the robot, in the estimate's frame)
    is slid over the wall map within +-radius cells; the offset with the
    highest overlap wins. Offsets are tried in row-major order and ties
    keep the first, so the result is deterministic.

    Args:
        patch: Boolean array of locally observed occupied cells.
        patch_origin: (row, col) where patch[0, 0] sits per the prior.
        walls: Boolean wall map to match against.
        prior: Current pose estimate.
        radius: Search half-width in cells.

    Returns:
        Prior pose translated by the best integer offset.

    Raises:
        LocalizationError: Every candidate offset scored zero overlap.
    """
    p = np.asarray(patch) != 0
    if not p.any():
        raise LocalizationError("no local structure to match")
    ph, pw = p.shape
    h, w = walls.shape
    r0, c0 = patch_origin
    best_score, best_off = 0, None
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            rr0, cc0 = r0 + dy, c0 + dx
            wr0, wc0 = max(0, rr0), max(0, cc0)
            wr1, wc1 = min(h, rr0 + ph), min(w, cc0 + pw)
            if wr0 >= wr1 or wc0 >= wc1:
                continue
            sub = walls[wr0:wr1, wc0:wc1]
            psub = p[wr0 - rr0:wr1 - rr0, wc0 - cc0:wc1 - cc0]
            score = int(np.count_nonzero(sub & psub))
            if score > best_score:
                best_score, best_off = score, (dy, dx)
    if best_off is None:
        raise LocalizationError("local structure matches no walls")
    return Pose(prior.x + best_off[1], prior.y + best_off[0], prior.heading)


# === plan belief (registration-derived motion map) ===

class PlanBelief:
    """The robot's registered view of the floor plan in world cells.

    After each registration the best variant's content box is aligned
    to the observed map's content box, which stays geometrically
    consistent however little of the world has been seen. Believed
    walls are then drawn directly into the world grid through that
    placement, so one-cell-thick walls stay connected at any scale
    (resampling a pre-rendered canvas would leave gaps). Door openings
    are carved out, since the robot must assume doors are passable.
    """

    def __init__(self, plan: fp.FloorPlan, doors: tuple[Door, ...],
                 world_shape: tuple[int, int], cfg: MotionConfig):
        self.plan = plan
        self.doors = tuple(doors)
        self.cfg = cfg
        self.world_shape = world_shape
        self.renders = registration.PlanRenderSet(plan)
        nw, nh = self.renders.native_w, self.renders.native_h
        scale, x0, y0 = fp.frame_params(plan, nw, nh)
        self._native_scale = scale
        self._origin = (x0, y0)
        self._native_shape = (nh, nw)

        self.walls_world = np.zeros(world_shape, dtype=bool)
        self.result: registration.RegistrationResult | None = None
        self._placement: tuple | None = None

    def native_cell_of_plan_point(self, x: float, y: float) -> tuple[float, float]:
        """Plan units -> native canvas (row, col)."""
        x0, y0 = self._origin
        return ((y - y0) * self._native_scale, (x - x0) * self._native_scale)

    def update(self, occupancy: np.ndarray) -> registration.RegistrationResult:
        """Re-register the current map and re-place the believed walls.

        The registration input is the known-cell silhouette (anything
        observed, free or occupied) with speckles filtered out.

        Raises:
            EmptyStructureError / NoMatchError: Nothing usable to match.
        """
        known = (occupancy != UNKNOWN_CELL).astype(np.uint8)
        known = raster.filter_components(known, self.cfg.min_component, 8)
        if not known.any():
            raise EmptyStructureError("observed map too small to register")
        result = registration.register(known, self.plan, renders=self.renders)
        rot, flip = result.transform.rot, result.transform.flip

        variant_native = self.renders.variant_mask(result.variant)
        t_variant = raster.apply_d4(variant_native, rot, flip)
        vr0, vc0, vr1, vc1 = raster.content_box(t_variant)
        sr0, sc0, sr1, sc1 = raster.content_box(known)
        s_v = (sr1 - sr0 + 1) / (vr1 - vr0 + 1)
        s_h = (sc1 - sc0 + 1) / (vc1 - vc0 + 1)

        out_h = max(1, int(round(t_variant.shape[0] * s_v)))
        out_w = max(1, int(round(t_variant.shape[1] * s_h)))
        scaled_variant = raster.resize_nn(t_variant, out_w, out_h)
        wr0, wc0, _, _ = raster.content_box(scaled_variant)
        off_r, off_c = sr0 - wr0, sc0 - wc0

        self.result = result
        self._placement = ((rot, flip), (s_v, s_h), (off_r, off_c),
                           t_variant.shape)

        walls = np.zeros(self.world_shape, dtype=np.uint8)
        for room in self.plan.rooms:
            pts = [self._world_xy(p[0], p[1]) for p in room.outline]
            raster.draw_polygon_edges(walls, pts, 1)
        for door in self.doors:
            a = self._world_xy(*door.segment[0])
            b = self._world_xy(*door.segment[1])
            for (r, c) in _line_cells(a, b):
                walls[max(0, r - 1):r + 2, max(0, c - 1):c + 2] = 0
        self.walls_world = walls.astype(bool)
        return result

    def world_point_of_plan_point(self, x: float, y: float) -> tuple[float, float] | None:
        """Plan units -> world (row, col) through the current placement."""
        if self._placement is None:
            return None
        (rot, flip), (s_v, s_h), (off_r, off_c), _ = self._placement
        nr, nc = self.native_cell_of_plan_point(x, y)
        tr, tc = raster.transform_cell((nr, nc), self._native_shape, rot, flip)
        return ((tr + 0.5) * s_v - 0.5 + off_r, (tc + 0.5) * s_h - 0.5 + off_c)

    def _world_xy(self, x: float, y: float) -> tuple[float, float]:
        """Plan units -> world (x, y) drawing coordinates."""
        wr, wc = self.world_point_of_plan_point(x, y)
        return (wc, wr)


# === mission logs ===

@dataclass(frozen=True)
class TickRecord:
    t: float
    true_pose: tuple[float, float, float]
    est_pose: tuple[float, float, float]
    d_since_registration: float
    path_remaining: float
    events: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        doc = {
            "t": round(self.t, 6),
            "true": [round(v, 6) for v in self.true_pose],
            "est": [round(v, 6) for v in self.est_pose],
            "d": round(self.d_since_registration, 6),
            "s_remaining": round(self.path_remaining, 6),
        }
        if self.events:
            doc["events"] = list(self.events)
        return doc


@dataclass(frozen=True)
class MissionLog:
    """Everything a mission run produced, reproducible bit for bit."""

    mode: str
    seed: int
    status: str  # "ok" or "timeout"
    trajectory: tuple[TickRecord, ...] = field(repr=False)
    replans: int
    registrations: int
    obstruction_registrations: int
    distance_registrations: int
    targets_found: tuple[dict, ...]
    rooms_visited: tuple[str, ...]
    distance_cells: float
    total_time_s: float

    def summary_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "status": self.status,
            "replans": self.replans,
            "registrations": self.registrations,
            "obstruction_registrations": self.obstruction_registrations,
            "distance_registrations": self.distance_registrations,
            "targets_found": list(self.targets_found),
            "rooms_visited": list(self.rooms_visited),
            "distance_cells": round(self.distance_cells, 6),
            "total_time_s": round(self.total_time_s, 6),
            "ticks": len(self.trajectory),
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(rec.to_dict(), separators=(",", ":"))
                 for rec in self.trajectory]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Scenario:
    """Mission framing: do we know how many targets there are?

    With known targets the robot receives their world positions and may
    stop once all are found; with unknown targets it must sweep every
    room (plan mode) or exhaust all frontiers (baseline) before halting.
    """

    targets_known: bool = True
    time_cap_s: float = 600.0


# === mission driver ===

class _Mission:
    """Shared mission machinery for the plan-guided and baseline modes."""

    def __init__(self, world: World, cfg: MotionConfig, scenario: Scenario,
                 plan: fp.FloorPlan | None):
        self.world = world
        self.cfg = cfg
        self.scenario = scenario
        self.plan = plan
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.true_pose = world.start
        self.est_pose = world.start
        self.map = np.full(world.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        self.t = 0.0
        self.d_since_reg = 0.0
        self.distance = 0.0
        self.replans = 0
        self.registrations = 0
        self.obstruction_regs = 0
        self.distance_regs = 0
        self.found = [False] * len(world.targets)
        self.found_records: list[dict] = []
        self.rooms_visited: list[str] = []
        self.records: list[TickRecord] = []
        self.events: list[str] = []
        self.path: list[tuple[int, int]] = []
        self.path_next = 0
        self.goal: tuple[int, int] | None = None
        self.goal_target: int | None = None
        self.goal_room: str | None = None
        self.goal_attempts = 0
        self.skipped_targets: set[int] = set()
        self.frontier_blacklist: set[tuple[int, int]] = set()
        self.bump_blocks: set[tuple[int, int]] = set()
        self.visited_rooms_believed: set[str] = set()
        # cells the robot has passed close enough to for its detector;
        # the margin below the detection radius hedges line-of-sight
        self.swept = np.zeros(world.grid.shape, dtype=bool)
        self._sweep_radius = max(1, int(round(cfg.target_radius * 0.7)))
        rr = np.arange(-self._sweep_radius, self._sweep_radius + 1)
        self._sweep_disk = (rr[:, None] ** 2 + rr[None, :] ** 2
                            <= self._sweep_radius ** 2)
        self.belief = (PlanBelief(plan, world.doors, world.grid.shape, cfg)
                       if plan is not None else None)

    # --- believed traversability ---

    def _traversable(self) -> np.ndarray:
        free = self.map == FREE_CELL
        occ = self.map == OCCUPIED_CELL
        if self.belief is not None:
            trav = (~self.belief.walls_world & ~occ) | free
        else:
            trav = free
        h, w = trav.shape
        for (r, c) in self.bump_blocks:
            if 0 <= r < h and 0 <= c < w:
                trav[r, c] = False
        er, ec = self.est_pose.cell()
        if 0 <= er < h and 0 <= ec < w:
            trav[er, ec] = True
        return trav

    # --- sensing + bookkeeping ---

    def _sense(self) -> None:
        scan = raycast_scan(self.world, self.true_pose, self.cfg.n_beams,
                            self.cfg.max_range, self.cfg.sample_step)
        # align the scan against the map built so far, then fuse it at
        # the corrected pose; this keeps the estimate in the map frame
        # and bounds odometry drift for the whole mission
        self._localize_scan(scan)
        integrate_scan(self.map, self.est_pose, scan,
                       self.cfg.max_range, self.cfg.sample_step)
        self._mark_swept()
        room = self.world.room_at(self.true_pose)
        if room is not None and room not in self.rooms_visited:
            self.rooms_visited.append(room)
        for i, tgt in enumerate(self.world.targets):
            if self.found[i]:
                continue
            dist = math.hypot(tgt.x - self.true_pose.x, tgt.y - self.true_pose.y)
            if dist <= self.cfg.target_radius and line_of_sight(
                    self.world, (self.true_pose.x, self.true_pose.y),
                    (tgt.x, tgt.y), self.cfg.sample_step):
                self.found[i] = True
                self.found_records.append({"index": i, "room": tgt.room,
                                           "t": round(self.t, 6)})
                self.events.append(f"target_found:{i}")
                if self.goal_target == i:
                    self._clear_goal()

    def _mark_swept(self) -> None:
        er, ec = self.est_pose.cell()
        rad = self._sweep_radius
        h, w = self.swept.shape
        r0, c0 = max(0, er - rad), max(0, ec - rad)
        r1, c1 = min(h, er + rad + 1), min(w, ec + rad + 1)
        if r0 >= r1 or c0 >= c1:
            return
        disk = self._sweep_disk[r0 - (er - rad):r1 - (er - rad),
                                c0 - (ec - rad):c1 - (ec - rad)]
        self.swept[r0:r1, c0:c1] |= disk

    def _clear_goal(self) -> None:
        self.goal = None
        self.goal_target = None
        self.goal_room = None
        self.path = []
        self.path_next = 0

    def _localize_scan(self, scan: ScanResult) -> None:
        """Correct the pose estimate by matching scan hits to the map."""
        walls = self.map == OCCUPIED_CELL
        if not walls.any():
            return
        hit_idx = np.flatnonzero(scan.hits)
        if not hit_idx.size:
            return
        hx = self.est_pose.x + np.cos(scan.angles[hit_idx]) * scan.ranges[hit_idx]
        hy = self.est_pose.y + np.sin(scan.angles[hit_idx]) * scan.ranges[hit_idx]
        hr = np.floor(hy).astype(np.int64)
        hc = np.floor(hx).astype(np.int64)
        r0, c0 = int(hr.min()), int(hc.min())
        patch = np.zeros((int(hr.max()) - r0 + 1, int(hc.max()) - c0 + 1),
                         dtype=bool)
        patch[hr - r0, hc - c0] = True
        try:
            corrected = localize(patch, (r0, c0), walls, self.est_pose,
                                 self.cfg.localize_radius)
        except LocalizationError:
            return
        if corrected == self.est_pose:
            return
        # only move on strict evidence: the shifted scan must match the
        # map better than staying put does
        dy = int(round(corrected.y - self.est_pose.y))
        dx = int(round(corrected.x - self.est_pose.x))
        if self._match_score(patch, r0, c0, walls, dy, dx) \
                <= self._match_score(patch, r0, c0, walls, 0, 0):
            return
        self.events.append("localize")
        self.est_pose = corrected

    @staticmethod
    def _match_score(patch: np.ndarray, r0: int, c0: int,
                     walls: np.ndarray, dy: int, dx: int) -> int:
        """Overlap count of the patch against walls, shifted by (dy, dx)."""
        h, w = walls.shape
        ph, pw = patch.shape
        wr0, wc0 = max(0, r0 + dy), max(0, c0 + dx)
        wr1, wc1 = min(h, r0 + dy + ph), min(w, c0 + dx + pw)
        if wr0 >= wr1 or wc0 >= wc1:
            return 0
        sub = patch[wr0 - (r0 + dy):wr1 - (r0 + dy),
                    wc0 - (c0 + dx):wc1 - (c0 + dx)]
        return int(np.count_nonzero(sub & walls[wr0:wr1, wc0:wc1]))

    def _register(self, reason: str) -> bool:
        if self.belief is None:
            return False
        try:
            self.belief.update(self.map)
        except (EmptyStructureError, NoMatchError):
            self.events.append("registration_failed")
            return False
        self.registrations += 1
        if reason == "obstruction":
            self.obstruction_regs += 1
        elif reason == "distance":
            self.distance_regs += 1
        self.events.append(f"registration:{reason}")
        self.d_since_reg = 0.0
        if self.goal_target is not None:
            # the believed target location moves with the placement
            cell = self._believed_target_cell(self.goal_target)
            if cell is not None and cell != self.goal:
                self.goal = cell
                self.path = []
                self.path_next = 0
        return True

    # --- goals and paths ---

    def _current_target_index(self) -> int | None:
        for i, flag in enumerate(self.found):
            if not flag and i not in self.skipped_targets:
                return i
        return None

    def _all_targets_found(self) -> bool:
        return all(self.found[i] or i in self.skipped_targets
                   for i in range(len(self.found)))

    def _select_goal(self) -> bool:
        """Ensure self.goal is set; False means the mission is complete."""
        if self.goal is not None:
            return True
        if self.belief is None:
            # Baseline: frontier-driven. With a known target count the
            # search stops only once every target is found, so after the
            # frontiers run out it sweeps free space it has not passed
            # close to yet; otherwise frontier exhaustion is the end.
            if self.scenario.targets_known and self._all_targets_found():
                return False
            if self._select_frontier_goal():
                return True
            if self.scenario.targets_known:
                return self._select_sweep_goal()
            return False
        if self.scenario.targets_known:
            idx = self._current_target_index()
            if idx is None:
                return False
            cell = self._believed_target_cell(idx)
            if cell is None:
                # not registered onto the plan yet; explore until we are
                return self._select_frontier_goal()
            self.goal = cell
            self.goal_target = idx
            self.goal_room = None
            self.goal_attempts = 0
            return True
        return self._select_room_goal()

    def _believed_target_cell(self, idx: int) -> tuple[int, int] | None:
        """Where the robot thinks target idx is, in world cells.

        Known target positions live in plan coordinates; the robot only
        reaches them through its current registration placement.
        """
        tgt = self.world.targets[idx]
        px, py = self.world.world_to_plan(tgt.x, tgt.y)
        pt = self.belief.world_point_of_plan_point(px, py)
        if pt is None:
            return None
        return (int(round(pt[0])), int(round(pt[1])))

    def _select_room_goal(self) -> bool:
        pending = [room for room in self.plan.rooms
                   if room.name not in self.visited_rooms_believed]
        if not pending:
            return False
        trav = self._traversable()
        field_arr = dijkstra_field(trav, self.est_pose.cell())
        best: tuple[float, str, tuple[int, int]] | None = None
        for room in pending:
            cx = float(np.mean(room.outline[:, 0]))
            cy = float(np.mean(room.outline[:, 1]))
            pt = self.belief.world_point_of_plan_point(cx, cy)
            if pt is None:
                continue
            cell = self._snap_traversable(trav, (int(round(pt[0])), int(round(pt[1]))))
            if cell is None:
                continue
            cost = field_arr[cell]
            if not math.isinf(cost) and (best is None or cost < best[0]):
                best = (cost, room.name, cell)
        if best is None:
            # believed map offers no route yet; expand like an explorer
            return self._select_frontier_goal()
        self.goal = best[2]
        self.goal_target = None
        self.goal_room = best[1]
        self.goal_attempts = 0
        return True

    def _frontier_mask(self) -> np.ndarray:
        free = self.map == FREE_CELL
        unknown = self.map == UNKNOWN_CELL
        pad = np.pad(unknown, 1, constant_values=True)
        near_unknown = (pad[:-2, 1:-1] | pad[2:, 1:-1]
                        | pad[1:-1, :-2] | pad[1:-1, 2:])
        return free & near_unknown

    def _select_frontier_goal(self) -> bool:
        frontier = self._frontier_mask()
        for cell in self.frontier_blacklist:
            frontier[cell] = False
        if not frontier.any():
            return False
        trav = self._traversable()
        field_arr = dijkstra_field(trav, self.est_pose.cell())
        costs = np.where(frontier, field_arr, np.inf)
        flat = int(np.argmin(costs))
        if math.isinf(costs.flat[flat]):
            return False  # frontiers exist but none are reachable
        self.goal = (flat // costs.shape[1], flat % costs.shape[1])
        self.goal_target = None
        self.goal_room = None
        self.goal_attempts = 0
        return True

    def _select_sweep_goal(self) -> bool:
        unswept = (self.map == FREE_CELL) & ~self.swept
        for cell in self.frontier_blacklist:
            unswept[cell] = False
        if not unswept.any():
            return False
        trav = self._traversable()
        field_arr = dijkstra_field(trav, self.est_pose.cell())
        costs = np.where(unswept, field_arr, np.inf)
        flat = int(np.argmin(costs))
        if math.isinf(costs.flat[flat]):
            return False
        self.goal = (flat // costs.shape[1], flat % costs.shape[1])
        self.goal_target = None
        self.goal_room = None
        self.goal_attempts = 0
        return True

    def _snap_traversable(self, trav: np.ndarray, cell: tuple[int, int],
                          radius: int = 4) -> tuple[int, int] | None:
        h, w = trav.shape
        r, c = cell
        best = None
        for dr in range(-radius, radius + 1):
            for dc in range(-radius, radius + 1):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and trav[nr, nc]:
                    d2 = dr * dr + dc * dc
                    if best is None or d2 < best[0]:
                        best = (d2, (nr, nc))
        return None if best is None else best[1]

    def _replan(self) -> bool:
        trav = self._traversable()
        start = self.est_pose.cell()
        goal = self._snap_traversable(trav, self.goal)
        if goal is None:
            return False
        try:
            self.path = plan_path(trav, start, goal)
        except UnreachableGoalError:
            return False
        self.path_next = 1 if len(self.path) > 1 else 0
        self.replans += 1
        self.events.append("replan")
        return True

    def _path_remaining(self) -> float:
        if not self.path or self.path_next >= len(self.path):
            return 0.0
        px, py = self.est_pose.x, self.est_pose.y
        total = 0.0
        for i in range(self.path_next, len(self.path)):
            wx, wy = self.path[i][1] + 0.5, self.path[i][0] + 0.5
            total += math.hypot(wx - px, wy - py)
            px, py = wx, wy
        return total

    def _goal_failed(self) -> None:
        """Give up on the current goal after repeated failures."""
        if self.goal_target is not None:
            # a target attempt that failed usually means the placement
            # is still wrong; widen the map first and try again, and
            # only skip once there is nothing left to explore
            idx = self.goal_target
            self._clear_goal()
            if self._select_frontier_goal():
                self.events.append("explore_detour")
                return
            self.skipped_targets.add(idx)
            self.events.append(f"target_skipped:{idx}")
            return
        if self.goal_room is not None:
            self.visited_rooms_believed.add(self.goal_room)
        elif self.goal is not None:
            self.frontier_blacklist.add(self.goal)
        self._clear_goal()

    # --- movement ---

    def _walk_path(self, budget: float) -> tuple[float, float, int]:
        """Where following the path for `budget` cells would lead.

        Returns the endpoint and the first unconsumed waypoint index;
        nothing is mutated.
        """
        pos_x, pos_y = self.est_pose.x, self.est_pose.y
        nxt = self.path_next
        remaining = budget
        while remaining > 1e-9 and nxt < len(self.path):
            wy, wx = self.path[nxt]
            tx, ty = wx + 0.5, wy + 0.5
            seg = math.hypot(tx - pos_x, ty - pos_y)
            if seg <= remaining + 1e-9:
                pos_x, pos_y = tx, ty
                remaining -= seg
                nxt += 1
            else:
                pos_x += (tx - pos_x) / seg * remaining
                pos_y += (ty - pos_y) / seg * remaining
                remaining = 0.0
        return pos_x, pos_y, nxt

    def _advance(self) -> float:
        """Move one tick along the path; returns odometric distance.

        The true pose takes the commanded motion plus actuation noise
        and stops at walls. The estimate advances along the path by the
        same fraction the wheels actually achieved (a stalled robot
        knows it stalled), so collisions never desynchronize the two
        frames; only the noise accumulates as drift.
        """
        budget = self.cfg.speed * self.cfg.dt
        tgt_x, tgt_y, _ = self._walk_path(budget)
        dx, dy = tgt_x - self.est_pose.x, tgt_y - self.est_pose.y
        cmd = math.hypot(dx, dy)
        heading = math.atan2(dy, dx) if cmd > 1e-9 else self.est_pose.heading

        attempted = step_motion(
            Pose(self.true_pose.x, self.true_pose.y, heading),
            (cmd / self.cfg.dt, 0.0), self.cfg.dt, self.cfg, self.rng)
        clamped = self._clamp_motion(self.true_pose, attempted)
        att = math.hypot(attempted.x - self.true_pose.x,
                         attempted.y - self.true_pose.y)
        ach = math.hypot(clamped.x - self.true_pose.x,
                         clamped.y - self.true_pose.y)
        frac = ach / att if att > 1e-12 else 1.0
        self.true_pose = clamped

        ex, ey, nxt = self._walk_path(cmd * frac)
        self.path_next = nxt
        self.est_pose = Pose(ex, ey, heading)

        if cmd > 1e-9 and frac < 1.0 - 1e-6:
            # bumped into something the map does not show yet: remember
            # the cell ahead as blocked and force a replan around it
            br = int(math.floor(ey + math.sin(heading) * 1.0))
            bc = int(math.floor(ex + math.cos(heading) * 1.0))
            if (br, bc) != self.est_pose.cell():
                self.bump_blocks.add((br, bc))
            self.path = []
            self.path_next = 0
            self.events.append("bump")
        return cmd * frac

    def _clamp_motion(self, origin: Pose, target: Pose) -> Pose:
        """Stop the true pose before it enters a blocked cell."""
        dx, dy = target.x - origin.x, target.y - origin.y
        dist = math.hypot(dx, dy)
        blocked = self.world.blocked
        h, w = blocked.shape
        if dist < 1e-12:
            return Pose(origin.x, origin.y, target.heading)
        n = max(1, int(math.ceil(dist / self.cfg.sample_step)))
        ok_x, ok_y = origin.x, origin.y
        for k in range(1, n + 1):
            t = min(1.0, k * self.cfg.sample_step / dist)
            x = origin.x + dx * t
            y = origin.y + dy * t
            r, c = int(math.floor(y)), int(math.floor(x))
            if not (0 <= r < h and 0 <= c < w) or blocked[r, c]:
                break
            ok_x, ok_y = x, y
        return Pose(ok_x, ok_y, target.heading)

    # --- obstruction trigger ---

    def _path_obstructed(self) -> bool:
        if not self.path or self.path_next >= len(self.path):
            return False
        for (r, c) in self.path[self.path_next:]:
            if self.map[r, c] == OCCUPIED_CELL:
                return True
        return False

    def _goal_reached(self) -> bool:
        if self.goal is None:
            return False
        gy, gx = self.goal
        return math.hypot(gx + 0.5 - self.est_pose.x,
                          gy + 0.5 - self.est_pose.y) <= 1.5

    # --- main loop ---

    def run(self, mode: str) -> MissionLog:
        self._sense()
        if self.belief is not None:
            self._register("initial")
        self._record()

        status = "timeout"
        while self.t < self.scenario.time_cap_s - 1e-9:
            if not self._select_goal():
                status = "ok"
                break
            if self.goal is not None and self.goal_target is None \
                    and self.map[self.goal] == OCCUPIED_CELL:
                # the goal cell turned out to be a wall; pick a new one
                # (target goals are exempt: replanning snaps them to the
                # nearest traversable cell instead)
                self._clear_goal()
                continue
            if self.path_next >= len(self.path):
                if not self._replan():
                    self.goal_attempts += 1
                    if self.belief is not None and self.goal_attempts <= 2:
                        # a fresh registration may open a route
                        self._register("retry")
                        self.t += self.cfg.dt
                        self._record()
                        continue
                    self._goal_failed()
                    continue

            cmd = self._advance()
            self.t += self.cfg.dt
            self.d_since_reg += cmd
            self.distance += cmd
            self._sense()

            if self._path_obstructed():
                self.path = []
                self.path_next = 0
                if self.belief is not None:
                    self._register("obstruction")
                else:
                    self.events.append("obstruction")
            elif (self.belief is not None
                    and self.d_since_reg >= self.cfg.relocation_distance):
                self._register("distance")

            if self._goal_reached():
                self._on_goal_reached(arrived=True)
            elif cmd < 1e-9:
                self._on_goal_reached(arrived=False)
            self._record()

        if status == "ok" and self.scenario.targets_known \
                and not all(self.found):
            status = "incomplete"
        total = self.t + self.cfg.registration_cost_s * self.registrations
        return MissionLog(
            mode=mode, seed=self.cfg.rng_seed, status=status,
            trajectory=tuple(self.records),
            replans=self.replans, registrations=self.registrations,
            obstruction_registrations=self.obstruction_regs,
            distance_registrations=self.distance_regs,
            targets_found=tuple(self.found_records),
            rooms_visited=tuple(self.rooms_visited),
            distance_cells=self.distance, total_time_s=total)

    def _on_goal_reached(self, arrived: bool) -> None:
        if self.goal is None:
            return
        if self.goal_target is not None:
            if self.found[self.goal_target]:
                self._clear_goal()
                return
            # at (or stuck short of) the believed target but nothing
            # found: re-anchor and retry
            self.goal_attempts += 1
            if self.belief is not None and self.goal_attempts <= 3:
                self._register("retry")
                self.path = []
                self.path_next = 0
            else:
                self._goal_failed()
            return
        if not arrived:
            # no progress this tick; retire the goal so we do not stall
            self._goal_failed()
            return
        if self.goal_room is not None:
            self.visited_rooms_believed.add(self.goal_room)
        self._clear_goal()

    def _record(self) -> None:
        self.records.append(TickRecord(
            t=self.t,
            true_pose=(self.true_pose.x, self.true_pose.y, self.true_pose.heading),
            est_pose=(self.est_pose.x, self.est_pose.y, self.est_pose.heading),
            d_since_registration=self.d_since_reg,
            path_remaining=self._path_remaining(),
            events=tuple(self.events)))
        self.events = []


def run_plan_slam(world: World, plan: fp.FloorPlan, cfg: MotionConfig,
                  scenario: Scenario | None = None) -> MissionLog:
    """Run the plan-guided mission: register, localize, plan through the plan.

    The robot scans, registers its partial map onto the plan, localizes
    against the believed walls every tick, and re-registers whenever a
    newly observed obstacle blocks its path or it has travelled the
    relocation distance since the last registration.
    """
    mission = _Mission(world, cfg, scenario or Scenario(), plan)
    return mission.run("plan_slam")


def run_frontier_baseline(world: World, cfg: MotionConfig,
                          scenario: Scenario | None = None) -> MissionLog:
    """Run the plan-free baseline: classic nearest-frontier exploration.

    The robot has the same sensor, motion model, and noise, but no floor
    plan: it drives to the nearest reachable frontier until the stopping
    rule fires (all targets found when the count is known, otherwise no
    frontiers left).
    """
    mission = _Mission(world, cfg, scenario or Scenario(), None)
    return mission.run("baseline")
