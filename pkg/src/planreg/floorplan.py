"""Floor-plan model: JSON parsing, room-subset variants, rasterization.

A plan is a set of named simple polygons ("rooms") in plan units with a
y-down axis, one of which is the living room. Variants are renders of
room subsets that always include the living room; they are what the
registration search matches a partial scan against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import geometry, raster
from .errors import SchemaError, VariantLimitError

ROOM_KINDS = ("living_room", "bedroom", "other")

# Exhaustive variant search is 2^n in the optional-room count; refuse
# plans where that stops being tractable.
MAX_OPTIONAL_ROOMS = 12


@dataclass(frozen=True)
class Room:
    """One room: a named simple polygon in plan units."""

    name: str
    kind: str
    outline: np.ndarray = field(repr=False)

    def area(self) -> float:
        return geometry.shoelace_area(self.outline)


@dataclass(frozen=True)
class FloorPlan:
    """An apartment plan: rooms plus the physical size of one grid cell."""

    rooms: tuple[Room, ...]
    units_per_cell: float

    def room(self, name: str) -> Room:
        for room in self.rooms:
            if room.name == name:
                return room
        raise KeyError(name)

    def living_room(self) -> Room:
        return next(r for r in self.rooms if r.kind == "living_room")

    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) over all room outlines."""
        pts = np.vstack([r.outline for r in self.rooms])
        return (float(pts[:, 0].min()), float(pts[:, 1].min()),
                float(pts[:, 0].max()), float(pts[:, 1].max()))

    def size(self) -> tuple[float, float]:
        """(width, height) of the plan in plan units."""
        x0, y0, x1, y1 = self.bounds()
        return (x1 - x0, y1 - y0)

    def area(self, names=None) -> float:
        """Total room area in plan units, optionally over a name subset."""
        rooms = self.rooms if names is None else [self.room(n) for n in names]
        return sum(r.area() for r in rooms)


@dataclass(frozen=True)
class PlanVariant:
    """A room subset (always containing the living room) and its render."""

    included: tuple[str, ...]
    mask: np.ndarray = field(repr=False)


# === parsing ===

def plan_from_dict(doc: dict) -> FloorPlan:
    """Build and validate a FloorPlan from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise SchemaError("plan document must be a JSON object")
    upc = doc.get("units_per_cell")
    if not isinstance(upc, (int, float)) or not np.isfinite(upc) or upc <= 0:
        raise SchemaError("units_per_cell must be a positive number")
    entries = doc.get("rooms")
    if not isinstance(entries, list) or not entries:
        raise SchemaError("rooms must be a non-empty list")

    rooms: list[Room] = []
    names: set[str] = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SchemaError(f"rooms[{i}] must be an object")
        name = entry.get("name")
        kind = entry.get("kind")
        corners = entry.get("corners")
        if not isinstance(name, str) or not name:
            raise SchemaError(f"rooms[{i}] needs a non-empty name")
        if name in names:
            raise SchemaError(f"duplicate room name {name!r}")
        if kind not in ROOM_KINDS:
            raise SchemaError(f"rooms[{i}] kind must be one of {ROOM_KINDS}")
        try:
            outline = geometry.as_polygon(corners, check_simple=True)
        except Exception as exc:
            raise SchemaError(f"rooms[{i}] outline invalid: {exc}") from exc
        if geometry.shoelace_area(outline) <= 0:
            raise SchemaError(f"rooms[{i}] outline has zero area")
        outline.setflags(write=False)
        names.add(name)
        rooms.append(Room(name=name, kind=kind, outline=outline))

    living = [r for r in rooms if r.kind == "living_room"]
    if len(living) != 1:
        raise SchemaError(f"plan needs exactly one living_room, found {len(living)}")
    return FloorPlan(rooms=tuple(rooms), units_per_cell=float(upc))


def parse_plan(text: str) -> FloorPlan:
    """Parse a plan JSON document.

    Raises:
        SchemaError: Malformed JSON or schema violations (missing keys,
            bad kinds, duplicate names, degenerate or self-intersecting
            outlines, not exactly one living room).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"plan is not valid JSON: {exc}") from exc
    return plan_from_dict(doc)


def plan_to_dict(plan: FloorPlan) -> dict:
    return {
        "units_per_cell": plan.units_per_cell,
        "rooms": [
            {"name": r.name, "kind": r.kind,
             "corners": [[float(x), float(y)] for x, y in r.outline]}
            for r in plan.rooms
        ],
    }


def plan_to_json(plan: FloorPlan) -> str:
    return json.dumps(plan_to_dict(plan), indent=2)


def load_plan(path) -> FloorPlan:
    return parse_plan(Path(path).read_text())


def save_plan(path, plan: FloorPlan) -> None:
    Path(path).write_text(plan_to_json(plan) + "\n")


# === variants ===

def variant_room_subsets(plan: FloorPlan) -> list[tuple[str, ...]]:
    """All room subsets containing the living room, as name tuples.

    Subsets are ordered by size then lexicographically by the optional
    room names, so the living-room-only variant always comes first.

    Raises:
        VariantLimitError: More than MAX_OPTIONAL_ROOMS optional rooms.
    """
    living = plan.living_room().name
    optional = sorted(r.name for r in plan.rooms if r.name != living)
    if len(optional) > MAX_OPTIONAL_ROOMS:
        raise VariantLimitError(
            f"{len(optional)} optional rooms exceeds limit {MAX_OPTIONAL_ROOMS}")
    subsets = []
    for k in range(len(optional) + 1):
        for combo in combinations(optional, k):
            subsets.append((living,) + combo)
    return subsets


def native_size(plan: FloorPlan) -> tuple[int, int]:
    """Render size (w, h) in cells at the plan's native resolution."""
    w_units, h_units = plan.size()
    return (max(1, int(np.ceil(w_units / plan.units_per_cell))),
            max(1, int(np.ceil(h_units / plan.units_per_cell))))


def frame_params(plan: FloorPlan, out_w: int, out_h: int) -> tuple[float, float, float]:
    """Frame mapping plan units onto an (out_h, out_w) canvas.

    Returns (scale, x0, y0): a plan point (x, y) lands on canvas cell
    coordinates ((x - x0) * scale, (y - y0) * scale). The scale is the
    largest aspect-preserving cells-per-unit factor that fits the whole
    plan extent, anchored at the top-left; every room of a plan shares
    this one frame.
    """
    x0, y0, x1, y1 = plan.bounds()
    return (min(out_w / (x1 - x0), out_h / (y1 - y0)), x0, y0)


def render_room(plan: FloorPlan, name: str, out_w: int, out_h: int) -> np.ndarray:
    """Rasterize a single room interior onto the full-plan canvas."""
    scale, x0, y0 = frame_params(plan, out_w, out_h)
    outline = (plan.room(name).outline - (x0, y0)) * scale
    return raster.fill_polygon((out_h, out_w), outline)


def render_variant(plan: FloorPlan, included, out_w: int | None = None,
                   out_h: int | None = None) -> np.ndarray:
    """Rasterize the union of the included rooms' interiors.

    Args:
        plan: Source plan.
        included: Iterable of room names (must exist in the plan).
        out_w: Canvas width in cells; defaults to the native width.
        out_h: Canvas height in cells; defaults to the native height.

    Returns:
        (out_h, out_w) uint8 mask. Filled interiors, not wall strokes;
        the render of a subset is always a sub-mask of any superset's.
    """
    if out_w is None or out_h is None:
        nw, nh = native_size(plan)
        out_w = nw if out_w is None else out_w
        out_h = nh if out_h is None else out_h
    mask = np.zeros((out_h, out_w), dtype=np.uint8)
    for name in included:
        mask |= render_room(plan, name, out_w, out_h)
    return mask


def enumerate_variants(plan: FloorPlan, out_w: int | None = None,
                       out_h: int | None = None) -> list[PlanVariant]:
    """Materialize every living-room-bearing subset with its render.

    The count is exactly 2^n for n optional rooms. Masks share the
    full-plan frame, so a variant's mask is the union of its rooms'.
    """
    return [PlanVariant(included=subset,
                        mask=render_variant(plan, subset, out_w, out_h))
            for subset in variant_room_subsets(plan)]
