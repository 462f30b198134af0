"""PGM image I/O and the grayscale encodings used by the toolkit.

Binary masks are stored with occupied = 0 (black) on empty = 255 (white).
Tri-state occupancy grids follow the common map-server convention:
occupied = 0, free = 254, unknown = 205. Both P5 (binary) and P2 (ASCII)
variants are supported, always with maxval 255.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .errors import SchemaError

# Tri-state occupancy cell codes (int8 grids).
UNKNOWN_CELL = -1
FREE_CELL = 0
OCCUPIED_CELL = 1

# Grayscale encodings of the tri-state codes.
GRAY_OCCUPIED = 0
GRAY_FREE = 254
GRAY_UNKNOWN = 205


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments.

    Yields (token, end_offset) so the caller can locate the raster start.
    """
    i, n = 0, len(data)
    while i < n:
        c = data[i:i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 PGM file.

    Args:
        path: File path.

    Returns:
        (H, W) uint8 image.

    Raises:
        SchemaError: Malformed header, wrong magic, or maxval != 255.
    """
    data = Path(path).read_bytes()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
        (w_tok, _), (h_tok, _), (maxval_tok, end) = next(toks), next(toks), next(toks)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except (StopIteration, ValueError) as exc:
        raise SchemaError("malformed PGM header") from exc
    if magic not in (b"P2", b"P5"):
        raise SchemaError(f"unsupported PGM magic {magic!r}")
    if maxval != 255:
        raise SchemaError(f"expected maxval 255, got {maxval}")
    if width < 1 or height < 1:
        raise SchemaError("non-positive PGM dimensions")

    if magic == b"P5":
        start = end + 1  # single whitespace byte after maxval
        raster = data[start:start + width * height]
        if len(raster) != width * height:
            raise SchemaError("PGM raster truncated")
        return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()

    values = []
    for tok, _ in toks:
        values.append(int(tok))
        if len(values) == width * height:
            break
    if len(values) != width * height:
        raise SchemaError("PGM raster truncated")
    arr = np.array(values, dtype=np.int64)
    if arr.min() < 0 or arr.max() > 255:
        raise SchemaError("PGM sample out of range")
    return arr.astype(np.uint8).reshape(height, width)


def write_pgm(path, image, binary: bool = True) -> None:
    """Write a uint8 image as PGM.

    Args:
        path: Output file path.
        image: (H, W) array, values 0..255.
        binary: True for P5, False for P2.
    """
    img = np.ascontiguousarray(np.asarray(image, dtype=np.uint8))
    if img.ndim != 2:
        raise SchemaError("expected a 2-D image")
    h, w = img.shape
    buf = io.BytesIO()
    if binary:
        buf.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        buf.write(img.tobytes())
    else:
        buf.write(f"P2\n{w} {h}\n255\n".encode("ascii"))
        for row in img:
            buf.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
    Path(path).write_bytes(buf.getvalue())


def mask_to_gray(mask) -> np.ndarray:
    """Encode a binary mask as grayscale: occupied = 0, empty = 255."""
    occ = np.asarray(mask) != 0
    return np.where(occ, 0, 255).astype(np.uint8)


def gray_to_mask(image) -> np.ndarray:
    """Decode a grayscale mask image: dark half (<= 127) is occupied."""
    return (np.asarray(image) <= 127).astype(np.uint8)


def occupancy_to_gray(grid) -> np.ndarray:
    """Encode an int8 tri-state grid with the 0 / 254 / 205 convention."""
    g = np.asarray(grid)
    out = np.full(g.shape, GRAY_UNKNOWN, dtype=np.uint8)
    out[g == OCCUPIED_CELL] = GRAY_OCCUPIED
    out[g == FREE_CELL] = GRAY_FREE
    return out


def gray_to_occupancy(image) -> np.ndarray:
    """Decode a 0 / 254 / 205 grayscale image into an int8 tri-state grid.

    Raises:
        SchemaError: The image holds a value outside the three codes.
    """
    img = np.asarray(image)
    out = np.full(img.shape, UNKNOWN_CELL, dtype=np.int8)
    out[img == GRAY_OCCUPIED] = OCCUPIED_CELL
    out[img == GRAY_FREE] = FREE_CELL
    known = (img == GRAY_OCCUPIED) | (img == GRAY_FREE) | (img == GRAY_UNKNOWN)
    if not known.all():
        bad = int(img[~known].flat[0])
        raise SchemaError(f"unexpected occupancy gray value {bad}")
    return out
