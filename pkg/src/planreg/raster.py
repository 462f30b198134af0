"""Binary raster operations: thresholding, filtering, cropping, transforms.

Masks are (H, W) uint8 arrays with values in {0, 1}; grayscale images are
(H, W) uint8 arrays in 0..255. Row index is y (downward), column index is x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, ShapeMismatchError

ROTATIONS = (0, 90, 180, 270)

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)
_STRUCT_8 = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class ComponentFilterConfig:
    """Thresholding and speckle-removal knobs for scan preprocessing.

    Attributes:
        theta: Binarization threshold; pixels >= theta become occupied.
        alpha: Minimum component area (cells) to survive filtering.
        connectivity: 4 or 8, connectivity used when filtering components.
    """

    theta: int = 128
    alpha: int = 50
    connectivity: int = 8


class IoUResult(NamedTuple):
    iou: float
    intersection: int
    union: int


def _as_binary(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ShapeMismatchError("expected a 2-D mask")
    return (arr != 0).astype(np.uint8)


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return _STRUCT_4
    if connectivity == 8:
        return _STRUCT_8
    raise ValueError("connectivity must be 4 or 8")


def binarize(image, theta: int) -> np.ndarray:
    """Threshold a grayscale image; pixels at or above theta are occupied.

    Args:
        image: (H, W) grayscale array.
        theta: Threshold value; ties count as occupied.

    Returns:
        (H, W) uint8 mask.
    """
    img = np.asarray(image)
    if img.ndim != 2:
        raise ShapeMismatchError("expected a 2-D image")
    return (img >= theta).astype(np.uint8)


def filter_components(mask, alpha: int, connectivity: int = 8) -> np.ndarray:
    """Drop connected components smaller than `alpha` cells.

    Args:
        mask: Binary mask.
        alpha: Minimum area (in cells) a component needs to survive.
        connectivity: 4 or 8.

    Returns:
        New mask with small components removed.
    """
    occ = _as_binary(mask)
    labels, count = ndimage.label(occ, structure=_structure(connectivity))
    if count == 0:
        return occ
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    keep = sizes >= alpha
    return keep[labels].astype(np.uint8)


def flood_fill(mask, seed: tuple[int, int], value: int) -> np.ndarray:
    """Flood-fill the 4-connected region containing `seed` with `value`.

    The region consists of all cells 4-connected to the seed that share
    the seed's current value.

    Args:
        mask: Binary mask.
        seed: (x, y) cell coordinates of the seed.
        value: 0 or 1 to write over the region.

    Returns:
        New mask with the region rewritten.

    Raises:
        IndexError: Seed lies outside the mask.
    """
    occ = _as_binary(mask)
    x, y = int(seed[0]), int(seed[1])
    h, w = occ.shape
    if not (0 <= x < w and 0 <= y < h):
        raise IndexError(f"seed ({x}, {y}) outside {w}x{h} mask")
    seed_val = occ[y, x]
    same = (occ == seed_val).astype(np.uint8)
    labels, _ = ndimage.label(same, structure=_STRUCT_4)
    region = labels == labels[y, x]
    out = occ.copy()
    out[region] = 1 if value else 0
    return out


def fill_holes(mask) -> np.ndarray:
    """Fill every hole not 4-connected to the border background.

    Equivalent to taking the complement of the exterior flood: the result
    is the union of the structure and all regions it encloses.
    """
    occ = _as_binary(mask)
    padded = np.pad(occ, 1)
    free = (padded == 0).astype(np.uint8)
    labels, _ = ndimage.label(free, structure=_STRUCT_4)
    exterior = labels == labels[0, 0]
    return (~exterior[1:-1, 1:-1]).astype(np.uint8)


def content_box(mask) -> tuple[int, int, int, int]:
    """Inclusive (row0, col0, row1, col1) bounds of the occupied cells."""
    occ = np.asarray(mask) != 0
    rows = np.flatnonzero(occ.any(axis=1))
    cols = np.flatnonzero(occ.any(axis=0))
    if rows.size == 0:
        raise EmptyMaskError("mask has no occupied cells")
    return int(rows[0]), int(cols[0]), int(rows[-1]), int(cols[-1])


def crop_to_content(mask, margin: int = 0) -> np.ndarray:
    """Crop a mask to its occupied bounding box plus an optional margin.

    The margin is clamped at the array edges, so cropping an already
    tight mask with margin 0 returns an identical copy.

    Raises:
        EmptyMaskError: No occupied cells to crop to.
    """
    occ = _as_binary(mask)
    r0, c0, r1, c1 = content_box(occ)
    h, w = occ.shape
    r0 = max(0, r0 - margin)
    c0 = max(0, c0 - margin)
    r1 = min(h - 1, r1 + margin)
    c1 = min(w - 1, c1 + margin)
    return occ[r0:r1 + 1, c0:c1 + 1].copy()


def resize_nn(mask, out_w: int, out_h: int) -> np.ndarray:
    """Nearest-neighbor resize sampling at output cell centers.

    Output cell (i, j) samples input cell (floor((i+0.5)*H/out_h),
    floor((j+0.5)*W/out_w)), which makes same-size resizing the identity
    and integer upscaling an exact block replication.

    Args:
        mask: 2-D array (any dtype; values are copied, not rescaled).
        out_w: Output width in cells.
        out_h: Output height in cells.
    """
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ShapeMismatchError("expected a 2-D array")
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be positive")
    in_h, in_w = arr.shape
    rows = np.minimum((np.arange(out_h) + 0.5) * in_h / out_h, in_h - 1).astype(np.int64)
    cols = np.minimum((np.arange(out_w) + 0.5) * in_w / out_w, in_w - 1).astype(np.int64)
    return arr[np.ix_(rows, cols)].copy()


def mask_iou(a, b) -> IoUResult:
    """Intersection-over-union of two equally shaped binary masks.

    Args:
        a: First mask.
        b: Second mask, same shape.

    Returns:
        IoUResult(iou, intersection, union); two empty masks score 0.0.

    Raises:
        ShapeMismatchError: Masks differ in shape.
    """
    ma, mb = _as_binary(a), _as_binary(b)
    if ma.shape != mb.shape:
        raise ShapeMismatchError(f"shape mismatch {ma.shape} vs {mb.shape}")
    inter = int(np.count_nonzero(ma & mb))
    union = int(np.count_nonzero(ma | mb))
    return IoUResult(inter / union if union else 0.0, inter, union)


def apply_d4(mask, rot: int, flip: bool) -> np.ndarray:
    """Apply one of the 8 axis-aligned symmetries to a mask.

    The horizontal flip (mirror across the vertical axis) is applied
    first, then a counter-clockwise rotation by `rot` degrees.

    Args:
        mask: 2-D array.
        rot: One of 0, 90, 180, 270.
        flip: Mirror across the vertical axis before rotating.

    Returns:
        Transformed copy (C-contiguous).
    """
    if rot not in ROTATIONS:
        raise ValueError(f"rot must be one of {ROTATIONS}")
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ShapeMismatchError("expected a 2-D array")
    if flip:
        arr = np.fliplr(arr)
    return np.ascontiguousarray(np.rot90(arr, rot // 90))


def transform_cell(cell: tuple[float, float], shape: tuple[int, int],
                   rot: int, flip: bool) -> tuple[float, float]:
    """Track a (row, col) position through apply_d4 on a (H, W) array.

    Accepts fractional positions; integer inputs land exactly where
    apply_d4 moves the corresponding cell.
    """
    if rot not in ROTATIONS:
        raise ValueError(f"rot must be one of {ROTATIONS}")
    r, c = float(cell[0]), float(cell[1])
    h, w = shape
    if flip:
        c = w - 1 - c
    for _ in range(rot // 90):
        r, c, h, w = w - 1 - c, r, w, h
    return (r, c)


# === rasterization ===

def fill_polygon(shape: tuple[int, int], polygon) -> np.ndarray:
    """Rasterize a polygon interior onto a grid by even-odd cell centers.

    A cell is occupied when its center (col + 0.5, row + 0.5) lies inside
    the polygon under the even-odd rule.

    Args:
        shape: (H, W) of the output grid.
        polygon: (N, 2) vertices in cell coordinates (x=col, y=row).

    Returns:
        (H, W) uint8 mask.
    """
    poly = np.asarray(polygon, dtype=np.float64)
    h, w = shape
    ys = (np.arange(h) + 0.5)[:, None]      # (H, 1)
    xs = (np.arange(w) + 0.5)[None, :]      # (1, W)
    inside = np.zeros((h, w), dtype=bool)
    n = poly.shape[0]
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > ys) != (y2 > ys)    # (H, 1)
        x_at = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xs < x_at)
    return inside.astype(np.uint8)


def draw_line(mask: np.ndarray, p0: tuple[int, int], p1: tuple[int, int],
              value: int = 1) -> None:
    """Draw a Bresenham line of cells from p0 to p1, in place.

    Args:
        mask: 2-D array to draw into.
        p0: (x, y) start cell.
        p1: (x, y) end cell.
        value: Cell value to write.
    """
    x0, y0 = int(round(p0[0])), int(round(p0[1]))
    x1, y1 = int(round(p1[0])), int(round(p1[1]))
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    h, w = mask.shape
    while True:
        if 0 <= y0 < h and 0 <= x0 < w:
            mask[y0, x0] = value
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def draw_polygon_edges(mask: np.ndarray, polygon, value: int = 1) -> None:
    """Draw the closed outline of a polygon as Bresenham segments, in place."""
    poly = np.asarray(polygon, dtype=np.float64)
    n = poly.shape[0]
    for i in range(n):
        draw_line(mask, poly[i], poly[(i + 1) % n], value)
