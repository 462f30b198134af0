"""Register partial LiDAR occupancy masks onto floor-plan renders.

The search is exhaustive: every room subset that contains the living room
is rendered, cropped, resized to a common square, and compared against
the (equally resized) scan under all eight axis-aligned symmetries. The
candidate with the highest intersection-over-union wins; the anisotropic
scale pair is then read off the native-resolution extents.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import floorplan, geometry, raster
from .errors import EmptyStructureError, NoMatchError
from .floorplan import FloorPlan
from .raster import ComponentFilterConfig, apply_d4, crop_to_content, mask_iou, resize_nn

MATCH_SIZE = 200  # square side both masks are resized to before scoring


# === dihedral bookkeeping ===
#
# A transform is (rot, flip): mirror across the vertical axis first (when
# flip is set), then rotate counter-clockwise by rot degrees. Canonical
# ids 0..7 order the group as the four rotations, then the four flipped
# variants, so id 0 is the identity.

def d4_canonical(rot: int, flip: bool) -> int:
    """Canonical id in 0..7 for a (rot, flip) pair; identity is 0."""
    if rot not in raster.ROTATIONS:
        raise ValueError(f"rot must be one of {raster.ROTATIONS}")
    return rot // 90 + (4 if flip else 0)


def d4_from_id(ident: int) -> tuple[int, bool]:
    """Inverse of d4_canonical."""
    if not 0 <= ident <= 7:
        raise ValueError("canonical id must be in 0..7")
    return (ident % 4) * 90, ident >= 4


def d4_compose(first: tuple[int, bool], then: tuple[int, bool]) -> tuple[int, bool]:
    """Transform equivalent to applying `first`, then `then`."""
    r1, f1 = first
    r2, f2 = then
    rot = (r2 - r1) % 360 if f2 else (r2 + r1) % 360
    return rot, bool(f1) != bool(f2)


def d4_inverse(g: tuple[int, bool]) -> tuple[int, bool]:
    """Inverse transform; reflections are their own inverses."""
    rot, flip = g
    return (rot if flip else (-rot) % 360, flip)


# === results ===

class CandidateScore(NamedTuple):
    variant: tuple[str, ...]
    rot: int
    flip: bool
    iou: float


@dataclass(frozen=True)
class TransformParams:
    """Recovered alignment: symmetry plus anisotropic scale.

    s_h and s_v map scan extents onto plan extents: they are the ratios
    of the transformed full-plan render's native width/height to the
    cropped scan's width/height.
    """

    rot: int
    flip: bool
    s_h: float
    s_v: float


@dataclass(frozen=True)
class RegistrationResult:
    transform: TransformParams
    variant: tuple[str, ...]
    iou: float
    candidates: tuple[CandidateScore, ...] = field(repr=False)
    plan_extent: tuple[float, float]
    scan_extent: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "rot": self.transform.rot,
            "flip": self.transform.flip,
            "s_h": self.transform.s_h,
            "s_v": self.transform.s_v,
            "variant": list(self.variant),
            "iou": self.iou,
            "candidates": [
                {"variant": list(c.variant), "rot": c.rot, "flip": c.flip,
                 "iou": c.iou}
                for c in self.candidates
            ],
        }


# === scan preprocessing ===

def preprocess_lidar(image, config: ComponentFilterConfig | None = None,
                     simplify_tolerance: float = 2.0) -> np.ndarray:
    """Turn a raw scan image into a cropped filled-region mask.

    Stages: binarize (skipped when the input is already a 0/1 mask),
    drop components smaller than alpha, redraw simplified outlines of
    non-solid components, fill enclosed holes, crop to content. Running
    the pipeline on its own output reproduces it bit for bit: the filled
    output has only solid components, so the smoothing stage is a no-op
    and fill and crop are fixpoints.

    Args:
        image: Grayscale scan (structure bright, thresholded at theta)
            or an already binary mask.
        config: Threshold/filter settings; defaults apply.
        simplify_tolerance: Outline simplification tolerance in cells;
            zero or negative disables the smoothing stage.

    Returns:
        Cropped uint8 filled-region mask.

    Raises:
        EmptyStructureError: Nothing survives thresholding + filtering.
    """
    cfg = config or ComponentFilterConfig()
    arr = np.asarray(image)
    if arr.dtype == bool or (arr.size and arr.max() <= 1):
        mask = (arr != 0).astype(np.uint8)
    else:
        mask = raster.binarize(arr, cfg.theta)
    mask = raster.filter_components(mask, cfg.alpha, cfg.connectivity)
    if not mask.any():
        raise EmptyStructureError("no structure above threshold survives filtering")
    if simplify_tolerance > 0:
        mask = _smooth_structure(mask, simplify_tolerance)
    return crop_to_content(raster.fill_holes(mask), 0)


def _smooth_structure(mask: np.ndarray, tolerance: float) -> np.ndarray:
    """Bridge jagged outlines by drawing simplified boundary chords.

    Components that are already solid (equal to their own hole fill) are
    left untouched, which is what makes the full pipeline idempotent.
    """
    from scipy import ndimage

    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=np.uint8))
    out = mask.copy()
    for lab in range(1, count + 1):
        comp = (labels == lab).astype(np.uint8)
        if np.array_equal(raster.fill_holes(comp), comp):
            continue
        contour = geometry.trace_boundary(comp)
        if contour.shape[0] < 3:
            continue
        simplified = geometry.simplify_contour(contour, tolerance)
        raster.draw_polygon_edges(out, simplified, 1)
    return out


# === plan render cache ===

class PlanRenderSet:
    """Per-plan render cache reused across repeated registrations.

    Holds the native-resolution room masks (shared full-plan frame), the
    ordered variant subsets, and memoized cropped-and-resized variant
    squares.
    """

    def __init__(self, plan: FloorPlan, match_size: int = MATCH_SIZE):
        self.plan = plan
        self.match_size = match_size
        self.native_w, self.native_h = floorplan.native_size(plan)
        self.room_masks = {
            room.name: floorplan.render_room(plan, room.name,
                                             self.native_w, self.native_h)
            for room in plan.rooms
        }
        self.subsets = floorplan.variant_room_subsets(plan)
        self.full_mask = self.variant_mask(tuple(r.name for r in plan.rooms))
        self._squares: dict[tuple[str, ...], np.ndarray] = {}

    def variant_mask(self, subset: tuple[str, ...]) -> np.ndarray:
        """Union of the subset's room masks on the native canvas."""
        mask = np.zeros((self.native_h, self.native_w), dtype=np.uint8)
        for name in subset:
            mask |= self.room_masks[name]
        return mask

    def variant_square(self, subset: tuple[str, ...]) -> np.ndarray:
        """Cropped, match-size render of a variant (memoized)."""
        square = self._squares.get(subset)
        if square is None:
            cropped = crop_to_content(self.variant_mask(subset), 0)
            square = resize_nn(cropped, self.match_size, self.match_size)
            self._squares[subset] = square
        return square


# === registration ===

def register(lidar_mask, plan: FloorPlan, renders: PlanRenderSet | None = None,
             match_size: int = MATCH_SIZE) -> RegistrationResult:
    """Find the plan variant and symmetry best matching a scan mask.

    Candidates are scored in a fixed order (variants by size then name,
    transforms by canonical id) and ties keep the earliest candidate, so
    the result is deterministic even for symmetric inputs.

    Args:
        lidar_mask: Binary filled-region scan mask (non-empty).
        plan: Floor plan to match against.
        renders: Optional pre-built render cache for `plan`.
        match_size: Comparison square side (cells).

    Returns:
        RegistrationResult with the winning transform, variant, score,
        the full candidate list, and the native extents behind the
        scale pair.

    Raises:
        EmptyStructureError: The scan mask has no occupied cells.
        NoMatchError: Every candidate scored zero overlap.
    """
    scan = (np.asarray(lidar_mask) != 0).astype(np.uint8)
    if not scan.any():
        raise EmptyStructureError("scan mask is empty")
    if renders is None or renders.plan is not plan or renders.match_size != match_size:
        renders = PlanRenderSet(plan, match_size)

    scan_cropped = crop_to_content(scan, 0)
    scan_square = resize_nn(scan_cropped, match_size, match_size)

    candidates: list[CandidateScore] = []
    best_idx, best_iou = -1, 0.0
    for subset in renders.subsets:
        square = renders.variant_square(subset)
        for ident in range(8):
            rot, flip = d4_from_id(ident)
            score = mask_iou(scan_square, apply_d4(square, rot, flip)).iou
            candidates.append(CandidateScore(subset, rot, flip, score))
            if score > best_iou:
                best_idx, best_iou = len(candidates) - 1, score
    if best_idx < 0:
        raise NoMatchError("no candidate overlaps the scan")

    best = candidates[best_idx]
    full_t = apply_d4(crop_to_content(renders.full_mask, 0), best.rot, best.flip)
    h1, v1 = geometry.bounding_box(full_t)
    h2, v2 = geometry.bounding_box(scan_cropped)
    params = TransformParams(rot=best.rot, flip=best.flip,
                             s_h=h1 / h2, s_v=v1 / v2)
    return RegistrationResult(transform=params, variant=best.variant,
                              iou=best.iou, candidates=tuple(candidates),
                              plan_extent=(h1, v1), scan_extent=(h2, v2))


def iou_a(per_room_ious: Iterable[float]) -> float:
    """Average per-room IoU: room-level placement accuracy in [0, 1]."""
    values = list(per_room_ious)
    if not values:
        raise ValueError("need at least one room IoU")
    return float(np.mean(values))


# === evaluation against generated ground truth ===

@dataclass(frozen=True)
class GroundTruth:
    """Generator-side record of how a scan mask was produced."""

    rot: int
    flip: bool
    s_h: float
    s_v: float
    variant: tuple[str, ...]
    crop_box: tuple[int, int, int, int]  # content box in the transformed canvas
    lidar_size: tuple[int, int]          # (w, h) of the saved scan mask
    completeness: float
    scale_factors: tuple[float, float]   # (a, b) applied to the render

    def to_dict(self) -> dict:
        return {
            "rot": self.rot, "flip": self.flip,
            "s_h": self.s_h, "s_v": self.s_v,
            "variant": list(self.variant),
            "crop_box": list(self.crop_box),
            "lidar_size": list(self.lidar_size),
            "completeness": self.completeness,
            "scale_factors": list(self.scale_factors),
        }

    @staticmethod
    def from_dict(doc: dict) -> "GroundTruth":
        return GroundTruth(
            rot=int(doc["rot"]), flip=bool(doc["flip"]),
            s_h=float(doc["s_h"]), s_v=float(doc["s_v"]),
            variant=tuple(doc["variant"]),
            crop_box=tuple(int(v) for v in doc["crop_box"]),
            lidar_size=tuple(int(v) for v in doc["lidar_size"]),
            completeness=float(doc["completeness"]),
            scale_factors=tuple(float(v) for v in doc["scale_factors"]),
        )


class EvalCase(NamedTuple):
    plan: FloorPlan
    lidar: np.ndarray
    truth: GroundTruth


@dataclass(frozen=True)
class CaseMetrics:
    rotation_ok: bool
    fold_ok: bool
    s_h_error: float
    s_v_error: float
    iou: float
    iou_a: float
    time_s: float
    completeness: float


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate registration quality over a case set."""

    n_cases: int
    fold_accuracy: float
    rotation_accuracy: float
    iou_a: float
    mean_time_s: float
    cases: tuple[CaseMetrics, ...] = field(repr=False)


def room_mask_in_scan_frame(renders: PlanRenderSet, room: str,
                            g: tuple[int, bool],
                            crop_box: tuple[int, int, int, int],
                            lidar_size: tuple[int, int]) -> np.ndarray:
    """Project one room into scan pixel coordinates.

    The room's native render is transformed by `g`, cropped to the given
    content box (of whatever region the scan frame was cut to), and
    resized to the scan's size.
    """
    rot, flip = g
    canvas = apply_d4(renders.room_masks[room], rot, flip)
    r0, c0, r1, c1 = crop_box
    w, h = lidar_size
    return resize_nn(canvas[r0:r1 + 1, c0:c1 + 1], w, h)


def per_room_ious(renders: PlanRenderSet, truth: GroundTruth,
                  predicted: RegistrationResult) -> list[float]:
    """Room-by-room IoU between predicted and true room placements.

    The predicted placement projects each room through the recovered
    transform with the full plan's content box mapped onto the scan
    frame; the true placement uses the generator's recorded transform
    and crop box. Every room of the plan contributes, so rooms missing
    from a partial scan pull the average down.
    """
    g_hat = (predicted.transform.rot, predicted.transform.flip)
    full_t = apply_d4(renders.full_mask, *g_hat)
    pred_box = raster.content_box(full_t)
    values = []
    for room in renders.plan.rooms:
        true_mask = room_mask_in_scan_frame(
            renders, room.name, (truth.rot, truth.flip),
            truth.crop_box, truth.lidar_size)
        pred_mask = room_mask_in_scan_frame(
            renders, room.name, g_hat, pred_box, truth.lidar_size)
        values.append(mask_iou(true_mask, pred_mask).iou)
    return values


def evaluate(cases: Iterable[EvalCase]) -> MetricsReport:
    """Run registration over ground-truthed cases and aggregate metrics.

    Returns:
        MetricsReport with fold/rotation accuracy (fraction of cases),
        mean room-level IoU, and mean wall time per registration.
    """
    metrics: list[CaseMetrics] = []
    render_cache: dict[int, PlanRenderSet] = {}
    for case in cases:
        renders = render_cache.get(id(case.plan))
        if renders is None:
            renders = PlanRenderSet(case.plan)
            render_cache[id(case.plan)] = renders
        t0 = time.perf_counter()
        result = register(case.lidar, case.plan, renders=renders)
        elapsed = time.perf_counter() - t0
        rooms = per_room_ious(renders, case.truth, result)
        metrics.append(CaseMetrics(
            rotation_ok=result.transform.rot == case.truth.rot,
            fold_ok=result.transform.flip == case.truth.flip,
            s_h_error=abs(result.transform.s_h / case.truth.s_h - 1.0),
            s_v_error=abs(result.transform.s_v / case.truth.s_v - 1.0),
            iou=result.iou,
            iou_a=iou_a(rooms),
            time_s=elapsed,
            completeness=case.truth.completeness,
        ))
    if not metrics:
        raise ValueError("no cases to evaluate")
    return MetricsReport(
        n_cases=len(metrics),
        fold_accuracy=float(np.mean([m.fold_ok for m in metrics])),
        rotation_accuracy=float(np.mean([m.rotation_ok for m in metrics])),
        iou_a=float(np.mean([m.iou_a for m in metrics])),
        mean_time_s=float(np.mean([m.time_s for m in metrics])),
        cases=tuple(metrics),
    )
