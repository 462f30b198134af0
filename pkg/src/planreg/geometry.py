"""Polygon and boundary geometry helpers used throughout the package.

Conventions: points are (x, y) pairs with y growing downward, polygons are
(N, 2) float arrays whose closing edge is implicit, and grid masks are
(H, W) arrays indexed [row, col] so a cell (row r, col c) has center
(x, y) = (c + 0.5, r + 0.5) when sub-cell positions matter and plain
(c, r) when only cell identity does.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, InvalidPolygonError

# Moore neighborhood in clockwise order: N, NE, E, SE, S, SW, W, NW.
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def as_polygon(points, *, check_simple: bool = False) -> np.ndarray:
    """Validate and normalize a vertex list into an (N, 2) float array.

    Args:
        points: Sequence of (x, y) pairs, at least 3 of them.
        check_simple: Also reject self-intersecting outlines.

    Returns:
        Float64 copy of the vertices.

    Raises:
        InvalidPolygonError: Fewer than 3 vertices, non-finite values,
            consecutive duplicate vertices, or (when requested) a
            self-intersection.
    """
    poly = np.asarray(points, dtype=np.float64)
    if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
        raise InvalidPolygonError("polygon needs at least 3 (x, y) vertices")
    if not np.all(np.isfinite(poly)):
        raise InvalidPolygonError("polygon has non-finite vertices")
    if np.any(np.all(poly == np.roll(poly, -1, axis=0), axis=1)):
        raise InvalidPolygonError("polygon has consecutive duplicate vertices")
    if check_simple and not is_simple_polygon(poly):
        raise InvalidPolygonError("polygon is self-intersecting")
    return poly


def shoelace_area(polygon) -> float:
    """Area of a simple polygon by the shoelace formula.

    Args:
        polygon: (N, 2) vertex array, implicitly closed, N >= 3.

    Returns:
        Absolute enclosed area (orientation independent).
    """
    poly = as_polygon(polygon)
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(abs(np.sum(x * yn - xn * y)) / 2.0)


def _seg_point_dists(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each point to the segment a-b."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(points[:, 0] - a[0], points[:, 1] - a[1])
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(points[:, 0] - proj[:, 0], points[:, 1] - proj[:, 1])


def _rdp_keep(points: np.ndarray, tolerance: float, keep: np.ndarray,
              lo: int, hi: int) -> None:
    """Mark indices retained by Ramer-Douglas-Peucker on points[lo..hi]."""
    stack = [(lo, hi)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        interior = points[i + 1:j]
        dists = _seg_point_dists(interior, points[i], points[j])
        k = int(np.argmax(dists))
        if dists[k] > tolerance:
            split = i + 1 + k
            keep[split] = True
            stack.append((i, split))
            stack.append((split, j))


def simplify_contour(points, tolerance: float) -> np.ndarray:
    """Simplify a closed boundary trace with Ramer-Douglas-Peucker.

    The trace is split at two anchor vertices (the first point and the
    point farthest from it) so the closing edge is simplified like any
    other stretch. Every dropped point lies within `tolerance` of the
    simplified outline, and the output vertices are a subsequence of the
    input. Zero tolerance only removes collinear points.

    Args:
        points: (N, 2) ordered boundary vertices, N >= 3.
        tolerance: Maximum allowed deviation of dropped points.

    Returns:
        (M, 2) float array, M >= 3.
    """
    poly = np.asarray(points, dtype=np.float64)
    if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
        raise InvalidPolygonError("contour needs at least 3 points")
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    n = poly.shape[0]
    far = int(np.argmax(np.hypot(poly[:, 0] - poly[0, 0], poly[:, 1] - poly[0, 1])))
    if far == 0:
        raise InvalidPolygonError("contour is a single repeated point")

    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[far] = True
    _rdp_keep(poly, tolerance, keep, 0, far)
    # Closing chain: far .. n-1 .. 0, handled on a wrapped copy.
    wrapped = np.vstack([poly[far:], poly[:1]])
    wkeep = np.zeros(wrapped.shape[0], dtype=bool)
    _rdp_keep(wrapped, tolerance, wkeep, 0, wrapped.shape[0] - 1)
    keep[far + np.flatnonzero(wkeep[:-1])] = True

    if keep.sum() < 3:
        # Both chains collapsed to their anchors; re-admit the point that
        # deviates most from the anchor chord so the result stays a polygon.
        dists = _seg_point_dists(poly, poly[0], poly[far])
        dists[keep] = -1.0
        keep[int(np.argmax(dists))] = True
    return poly[keep]


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Trace the outer boundary of the first 8-connected region.

    Moore-neighbor tracing starting from the topmost-leftmost occupied
    cell, walking clockwise, with Jacob's stopping criterion. Only the
    component containing the start cell is traced.

    Args:
        mask: (H, W) binary mask.

    Returns:
        (K, 2) float array of boundary cell coordinates as (x=col, y=row),
        ordered clockwise. A single occupied cell yields one point.

    Raises:
        EmptyMaskError: Mask has no occupied cells.
    """
    occ = np.asarray(mask) != 0
    cells = np.argwhere(occ)
    if cells.size == 0:
        raise EmptyMaskError("cannot trace an empty mask")
    h, w = occ.shape
    start = (int(cells[0, 0]), int(cells[0, 1]))

    contour = [start]
    cur = start
    back = (start[0], start[1] - 1)  # west of start is free by scan order
    first_move = None
    for _ in range(4 * cells.shape[0] + 8):
        bidx = _RING.index((back[0] - cur[0], back[1] - cur[1]))
        nxt = None
        for k in range(1, 9):
            dr, dc = _RING[(bidx + k) % 8]
            cand = (cur[0] + dr, cur[1] + dc)
            if 0 <= cand[0] < h and 0 <= cand[1] < w and occ[cand]:
                pr, pc = _RING[(bidx + k - 1) % 8]
                nxt = cand
                back = (cur[0] + pr, cur[1] + pc)
                break
        if nxt is None:
            break  # isolated cell
        move = (cur, nxt)
        if first_move is None:
            first_move = move
        elif move == first_move:
            break
        contour.append(nxt)
        cur = nxt
    pts = np.array(contour, dtype=np.float64)
    return pts[:, ::-1].copy()  # (row, col) -> (x, y)


def corner_points(mask: np.ndarray, simplify_tolerance: float = 2.0,
                  angle_threshold_deg: float = 30.0) -> np.ndarray:
    """Detect corner candidates on the boundaries of occupied regions.

    Each 8-connected component's outer boundary is traced, simplified,
    and vertices whose incoming/outgoing edges turn by more than the
    angle threshold are kept.

    Args:
        mask: (H, W) binary mask with at least one occupied cell.
        simplify_tolerance: Deviation tolerance for the boundary trace.
        angle_threshold_deg: Minimum turn angle for a dominant point.

    Returns:
        (M, 2) float array of corner coordinates as (x=col, y=row),
        in component order then boundary order.
    """
    occ = (np.asarray(mask) != 0).astype(np.uint8)
    if not occ.any():
        raise EmptyMaskError("mask has no occupied cells")
    labels, count = ndimage.label(occ, structure=np.ones((3, 3), dtype=np.uint8))

    corners: list[np.ndarray] = []
    for lab in range(1, count + 1):
        comp = labels == lab
        contour = trace_boundary(comp)
        if contour.shape[0] < 3:
            corners.append(contour)
            continue
        simp = simplify_contour(contour, simplify_tolerance)
        prev = np.roll(simp, 1, axis=0)
        nxt = np.roll(simp, -1, axis=0)
        v1 = simp - prev
        v2 = nxt - simp
        cross = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
        dot = v1[:, 0] * v2[:, 0] + v1[:, 1] * v2[:, 1]
        turn = np.abs(np.degrees(np.arctan2(cross, dot)))
        corners.append(simp[turn > angle_threshold_deg])
    return np.vstack(corners) if corners else np.empty((0, 2))


def bounding_box(obj) -> tuple[float, float]:
    """Width and height of a polygon's or mask's occupied extent.

    Float arrays are treated as (N, 2) vertex lists (extent = coordinate
    range); integer or boolean arrays are treated as masks (extent =
    inclusive span of occupied rows/cols, in cells).

    Args:
        obj: Polygon vertices or binary mask.

    Returns:
        (width, height) tuple.
    """
    arr = np.asarray(obj)
    if np.issubdtype(arr.dtype, np.floating):
        poly = as_polygon(arr)
        w = float(poly[:, 0].max() - poly[:, 0].min())
        h = float(poly[:, 1].max() - poly[:, 1].min())
        return (w, h)
    rows = np.flatnonzero(arr.any(axis=1))
    cols = np.flatnonzero(arr.any(axis=0))
    if rows.size == 0:
        raise EmptyMaskError("mask has no occupied cells")
    return (float(cols[-1] - cols[0] + 1), float(rows[-1] - rows[0] + 1))


def _orient(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def _on_segment(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> bool:
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_cross(a, b, c, d) -> bool:
    """True when segment ab intersects cd (touching counts)."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 \
            and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def is_simple_polygon(polygon) -> bool:
    """Check that no two non-adjacent edges of the polygon intersect."""
    poly = np.asarray(polygon, dtype=np.float64)
    n = poly.shape[0]
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex by design
            if _segments_cross(*edges[i], *edges[j]):
                return False
    return True
