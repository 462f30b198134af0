"""Synthetic data: floor plans, ground-truthed scan masks, and worlds.

Plans are produced by recursive guillotine splits of a rectangle on a
half-unit lattice, which yields realistic rectilinear apartments whose
rooms tile the outline exactly (shared walls, no gaps). Scan masks are
renders of room subsets pushed through a random symmetry and an
anisotropic scale, with the generation parameters recorded as ground
truth so registration quality can be scored end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import floorplan as fp
from . import pgm, raster, registration
from .registration import GroundTruth, PlanRenderSet

ROOM_MIN_SIDE = 1.5     # plan units
DOOR_MIN_OVERLAP = 1.6  # wall overlap needed to cut a 1-unit door
DEFAULT_LEVELS = (0.5, 0.7, 0.9, 1.0)


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def corners(self) -> list[list[float]]:
        return [[self.x, self.y], [self.x + self.w, self.y],
                [self.x + self.w, self.y + self.h], [self.x, self.y + self.h]]

    def area(self) -> float:
        return self.w * self.h


def _snap(value: float) -> float:
    return round(value * 2.0) / 2.0


def _split_rects(rng: np.random.Generator, width: float, height: float,
                 n_rooms: int) -> list[Rect]:
    """Guillotine-split a rectangle into n_rooms axis-aligned pieces."""
    rects = [Rect(0.0, 0.0, width, height)]
    for _ in range(200):
        if len(rects) >= n_rooms:
            break
        # split the largest piece that still has room for two halves
        order = sorted(range(len(rects)), key=lambda i: (-rects[i].area(), i))
        idx = next((i for i in order
                    if max(rects[i].w, rects[i].h) >= 2 * ROOM_MIN_SIDE), None)
        if idx is None:
            break
        r = rects.pop(idx)
        vertical = r.w >= r.h
        span = r.w if vertical else r.h
        lo, hi = ROOM_MIN_SIDE, span - ROOM_MIN_SIDE
        cut = min(max(_snap(rng.uniform(lo, hi)), lo), hi)
        if vertical:
            rects.insert(idx, Rect(r.x, r.y, cut, r.h))
            rects.append(Rect(r.x + cut, r.y, r.w - cut, r.h))
        else:
            rects.insert(idx, Rect(r.x, r.y, r.w, cut))
            rects.append(Rect(r.x, r.y + cut, r.w, r.h - cut))
    return rects


def _rects_to_plan(rng: np.random.Generator, rects: list[Rect]) -> fp.FloorPlan:
    rects = sorted(rects, key=lambda r: (r.y, r.x))
    living_idx = max(range(len(rects)), key=lambda i: (rects[i].area(), -i))
    rooms = []
    letters = "abcdefghijklmnop"
    k = 0
    for i, rect in enumerate(rects):
        if i == living_idx:
            name, kind = "living", "living_room"
        else:
            name = f"room_{letters[k]}"
            kind = "bedroom" if rng.random() < 0.7 else "other"
            k += 1
        rooms.append({"name": name, "kind": kind, "corners": rect.corners()})
    max_dim = max(max(r.x + r.w for r in rects), max(r.y + r.h for r in rects))
    units_per_cell = max_dim / float(rng.integers(120, 170))
    return fp.plan_from_dict({"units_per_cell": units_per_cell, "rooms": rooms})


def _transform_distinctness(plan: fp.FloorPlan) -> int:
    """Smallest cell difference between the plan render and any non-identity
    symmetry of it, measured on the match square."""
    square = raster.resize_nn(
        raster.crop_to_content(fp.render_variant(plan, [r.name for r in plan.rooms])),
        registration.MATCH_SIZE, registration.MATCH_SIZE)
    worst = square.size
    for ident in range(1, 8):
        rot, flip = registration.d4_from_id(ident)
        diff = int(np.count_nonzero(raster.apply_d4(square, rot, flip) != square))
        worst = min(worst, diff)
    return worst


def _connected(rects: list[Rect]) -> bool:
    """Do the rects form one region linked by door-sized shared walls?"""
    if not rects:
        return False
    seen = {0}
    queue = [0]
    while queue:
        i = queue.pop()
        for j in range(len(rects)):
            if j not in seen and _shared_wall(rects[i], rects[j]) is not None:
                seen.add(j)
                queue.append(j)
    return len(seen) == len(rects)


def _drop_notches(rng: np.random.Generator, rects: list[Rect],
                  n_keep: int) -> list[Rect] | None:
    """Remove boundary pieces until n_keep remain, keeping the rest connected.

    A union of guillotine pieces that covers the whole rectangle is a
    solid block, which every symmetry maps onto itself; carving notches
    off the outer boundary is what makes the building outline tell its
    own orientation. Only boundary pieces are removed so the remaining
    region never encloses a hole.
    """
    width = max(r.x + r.w for r in rects)
    height = max(r.y + r.h for r in rects)
    kept = list(rects)
    while len(kept) > n_keep:
        boundary = [i for i, r in enumerate(kept)
                    if r.x <= 1e-9 or r.y <= 1e-9
                    or r.x + r.w >= width - 1e-9 or r.y + r.h >= height - 1e-9]
        choices = [i for i in boundary
                   if _connected(kept[:i] + kept[i + 1:])]
        if not choices:
            return None
        kept.pop(choices[int(rng.integers(len(choices)))])
    return kept


def gen_floorplan(rng: np.random.Generator, n_rooms: int,
                  require_asymmetric: bool = True,
                  min_distinct_cells: int = 1200) -> tuple[fp.FloorPlan, list[Rect]]:
    """Generate a random rectilinear plan with the requested room count.

    The building outline is a rectangle with one or two corner notches
    carved out, so the footprint is an L/T/U polyomino rather than a
    solid block. With require_asymmetric the plan is regenerated until
    no symmetry of its render comes within min_distinct_cells of the
    render itself, so the true transform of a full scan is unambiguous
    by a margin.
    """
    for _ in range(300):
        width = min(max(_snap(rng.uniform(9.0, 14.0)), 8.0), 14.0)
        height = min(max(_snap(rng.uniform(7.0, 11.0)), 6.0), 11.0)
        n_drop = int(rng.integers(1, 3))
        rects = _split_rects(rng, width, height, n_rooms + n_drop)
        if len(rects) != n_rooms + n_drop:
            continue
        kept = _drop_notches(rng, sorted(rects, key=lambda r: (r.y, r.x)), n_rooms)
        if kept is None:
            continue
        kept = sorted(kept, key=lambda r: (r.y, r.x))
        plan = _rects_to_plan(rng, kept)
        if not require_asymmetric or _transform_distinctness(plan) >= min_distinct_cells:
            return plan, kept
    raise RuntimeError("could not generate a suitable plan")


# === registration cases ===

def room_cell_counts(renders: PlanRenderSet) -> dict[str, int]:
    return {name: int(np.count_nonzero(mask))
            for name, mask in renders.room_masks.items()}


def choose_subset(renders: PlanRenderSet, level: float,
                  rel_tol: float = 0.02) -> tuple[str, ...] | None:
    """Pick the room subset whose cell share best matches a completeness
    level; None when nothing lands within the relative tolerance."""
    counts = room_cell_counts(renders)
    total = sum(counts.values())
    if level >= 1.0:
        return renders.subsets[-1]
    best, best_err = None, np.inf
    for subset in renders.subsets:
        frac = sum(counts[name] for name in subset) / total
        err = abs(frac - level)
        if err < best_err:
            best, best_err = subset, err
    if best is not None and best_err <= rel_tol * level:
        return best
    return None


@dataclass(frozen=True)
class RegistrationCase:
    plan: fp.FloorPlan
    lidar: np.ndarray
    truth: GroundTruth


def make_registration_case(rng: np.random.Generator, level: float,
                           n_rooms_range: tuple[int, int] = (5, 7)
                           ) -> RegistrationCase:
    """Generate one plan + scan mask + ground truth at a completeness level."""
    renders = None
    subset = None
    plan = None
    for attempt in range(200):
        n_rooms = int(rng.integers(n_rooms_range[0], n_rooms_range[1] + 1))
        plan, _ = gen_floorplan(rng, n_rooms)
        renders = PlanRenderSet(plan)
        tol = 0.02 if attempt < 60 else 0.035
        subset = choose_subset(renders, level, rel_tol=tol)
        if subset is not None:
            break
    if subset is None:
        raise RuntimeError(f"no room subset matches completeness {level}")

    rot = int(rng.choice([0, 90, 180, 270]))
    flip = bool(rng.integers(0, 2))
    canvas = renders.variant_mask(subset)
    transformed = raster.apply_d4(canvas, rot, flip)
    r0, c0, r1, c1 = raster.content_box(transformed)
    sub = transformed[r0:r1 + 1, c0:c1 + 1]

    a = float(rng.uniform(0.6, 1.5))
    b = float(rng.uniform(0.6, 1.5))
    out_w = max(8, int(round(sub.shape[1] * a)))
    out_h = max(8, int(round(sub.shape[0] * b)))
    lidar = raster.resize_nn(sub, out_w, out_h)

    # scale truth measured exactly the way register() reports it
    full_t = raster.apply_d4(raster.crop_to_content(renders.full_mask), rot, flip)
    cr0, cc0, cr1, cc1 = raster.content_box(lidar)
    s_h = full_t.shape[1] / (cc1 - cc0 + 1)
    s_v = full_t.shape[0] / (cr1 - cr0 + 1)
    truth = GroundTruth(rot=rot, flip=flip, s_h=s_h, s_v=s_v, variant=subset,
                        crop_box=(r0, c0, r1, c1), lidar_size=(out_w, out_h),
                        completeness=level, scale_factors=(a, b))
    return RegistrationCase(plan=plan, lidar=lidar, truth=truth)


def write_case(out_dir: Path, index: int, case: RegistrationCase) -> None:
    stem = out_dir / f"case_{index:04d}"
    fp.save_plan(stem.with_suffix(".plan.json"), case.plan)
    pgm.write_pgm(stem.with_suffix(".lidar.pgm"), pgm.mask_to_gray(case.lidar))
    stem.with_suffix(".truth.json").write_text(
        json.dumps(case.truth.to_dict(), indent=2) + "\n")


def load_case(stem: Path) -> registration.EvalCase:
    plan = fp.load_plan(stem.with_suffix(".plan.json"))
    lidar = pgm.gray_to_mask(pgm.read_pgm(stem.with_suffix(".lidar.pgm")))
    truth = GroundTruth.from_dict(
        json.loads(stem.with_suffix(".truth.json").read_text()))
    return registration.EvalCase(plan=plan, lidar=lidar, truth=truth)


def case_stems(directory: Path) -> list[Path]:
    return sorted(p.with_suffix("").with_suffix("")
                  for p in Path(directory).glob("case_*.truth.json"))


def generate_dataset(out_dir, n_cases: int, levels=DEFAULT_LEVELS,
                     seed: int = 0) -> list[Path]:
    """Write n_cases plan/scan/truth triples, cycling completeness levels."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    stems = []
    for i in range(n_cases):
        level = float(levels[i % len(levels)])
        case = make_registration_case(rng, level)
        write_case(out, i, case)
        stems.append(out / f"case_{i:04d}")
    return stems


# === worlds ===

def _shared_wall(a: Rect, b: Rect) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Door-sized segment centered on the wall shared by two rects, if any."""
    # vertical shared wall: a's right edge meets b's left edge (or swapped)
    for left, right in ((a, b), (b, a)):
        if abs((left.x + left.w) - right.x) < 1e-9:
            y0 = max(left.y, right.y)
            y1 = min(left.y + left.h, right.y + right.h)
            if y1 - y0 >= DOOR_MIN_OVERLAP:
                mid = (y0 + y1) / 2.0
                x = left.x + left.w
                return ((x, mid - 0.5), (x, mid + 0.5))
    for top, bottom in ((a, b), (b, a)):
        if abs((top.y + top.h) - bottom.y) < 1e-9:
            x0 = max(top.x, bottom.x)
            x1 = min(top.x + top.w, bottom.x + bottom.w)
            if x1 - x0 >= DOOR_MIN_OVERLAP:
                mid = (x0 + x1) / 2.0
                y = top.y + top.h
                return ((mid - 0.5, y), (mid + 0.5, y))
    return None


def gen_world_dict(rng: np.random.Generator, n_rooms: int = 6,
                   n_targets: int = 2, resolution: float = 4.0,
                   extra_door_prob: float = 0.3) -> dict:
    """Generate a world document: plan, connecting doors, targets, start.

    Doors form a spanning tree over the room-adjacency graph (so every
    room is reachable from the living room), plus optional redundant
    doors. All doors start open; callers may mark some closed as long
    as the open subgraph stays connected.
    """
    for _ in range(100):
        plan, rects = gen_floorplan(rng, n_rooms)
        adjacency: list[tuple[int, int, tuple]] = []
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                seg = _shared_wall(rects[i], rects[j])
                if seg is not None:
                    adjacency.append((i, j, seg))
        # breadth-first spanning tree from the living room
        living_idx = next(i for i, room in enumerate(plan.rooms)
                          if room.kind == "living_room")
        reached = {living_idx}
        tree: list[tuple[int, int, tuple]] = []
        frontier = [living_idx]
        while frontier:
            nxt = []
            for edge in adjacency:
                i, j, seg = edge
                if (i in reached) != (j in reached):
                    tree.append(edge)
                    new = j if i in reached else i
                    reached.add(new)
                    nxt.append(new)
            if not nxt:
                break
            frontier = nxt
        if len(reached) != len(rects):
            continue  # adjacency too sparse for doors; next plan

        doors = []
        tree_set = {(i, j) for i, j, _ in tree}
        for i, j, seg in adjacency:
            if (i, j) in tree_set or rng.random() < extra_door_prob:
                doors.append({
                    "id": f"d{len(doors)}",
                    "from": plan.rooms[i].name,
                    "to": plan.rooms[j].name,
                    "segment": [list(seg[0]), list(seg[1])],
                    "closed": False,
                })

        # victims hide in the rooms farthest from the living room, so a
        # mission cannot fish them out of the first scan
        lr = rects[living_idx]
        lcx, lcy = lr.x + lr.w / 2.0, lr.y + lr.h / 2.0
        candidates = [i for i in range(len(rects)) if i != living_idx]
        candidates.sort(key=lambda i: (-float(np.hypot(
            rects[i].x + rects[i].w / 2.0 - lcx,
            rects[i].y + rects[i].h / 2.0 - lcy)), i))
        picks = candidates[:min(n_targets, len(candidates))]
        targets = [{"x": rects[i].x + rects[i].w / 2.0,
                    "y": rects[i].y + rects[i].h / 2.0,
                    "room": plan.rooms[i].name} for i in sorted(picks)]
        start = {"x": lr.x + lr.w / 2.0, "y": lr.y + lr.h / 2.0, "heading": 0.0}
        return {
            "plan": fp.plan_to_dict(plan),
            "resolution_cells_per_unit": resolution,
            "doors": doors,
            "targets": targets,
            "start": start,
        }
    raise RuntimeError("could not generate a connected world")


def save_world(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
