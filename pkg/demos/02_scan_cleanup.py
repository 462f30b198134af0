#!/usr/bin/env python3
"""Clean a raw scan image into a registration-ready mask.

Raw occupancy images are noisy: stray speckles from sensor glitches,
unclosed outlines, and holes inside the structure where nothing was
measured. Registration wants a single filled silhouette. This script
corrupts a clean scan the way real captures go wrong, then walks the
cleanup stages (threshold, small-component removal, outline smoothing
plus hole filling, crop) and shows the one-call pipeline is idempotent.

Run from the repository root:

    python3 demos/02_scan_cleanup.py
"""

from __future__ import annotations

import numpy as np

from planreg import datagen
from planreg.raster import (ComponentFilterConfig, binarize, crop_to_content,
                            filter_components, resize_nn)
from planreg.registration import preprocess_lidar


def ascii_mask(mask: np.ndarray, width: int = 64) -> str:
    h, w = mask.shape
    out_w = min(width, w)
    out_h = max(1, round(h * out_w / w / 2))
    small = resize_nn(mask, out_w, out_h)
    return "\n".join("".join("#" if v else "." for v in row) for row in small)


def corrupt(rng: np.random.Generator, mask: np.ndarray) -> np.ndarray:
    """Turn a clean mask into a plausible raw grayscale capture."""
    pad = 16
    framed = np.pad(mask, pad)  # captures come with empty margin around them
    h, w = framed.shape
    img = np.where(framed > 0, 230, 40).astype(np.uint8)     # dim background
    img += rng.integers(0, 20, size=(h, w)).astype(np.uint8)  # sensor noise

    # Punch unmeasured holes inside the structure.
    for _ in range(6):
        r = int(rng.integers(pad, h - pad - 4))
        c = int(rng.integers(pad, w - pad - 4))
        img[r:r + 4, c:c + 4] = 60

    # Sprinkle bright speckle clusters outside it.
    for _ in range(30):
        r = int(rng.integers(0, h - 2))
        c = int(rng.integers(0, w - 2))
        if not framed[r:r + 2, c:c + 2].any():
            img[r:r + 2, c:c + 2] = 250
    return img


def main() -> None:
    rng = np.random.default_rng(21)
    cfg = ComponentFilterConfig()

    print("=== 1. Start from a clean scan, then corrupt it ===")
    case = datagen.make_registration_case(rng, level=1.0)
    clean = case.lidar
    raw = corrupt(rng, clean)
    print(f"Clean mask: {clean.shape[1]} x {clean.shape[0]} cells, "
          f"{int(clean.sum())} occupied")
    print("Raw capture (thresholded for display):")
    print(ascii_mask(binarize(raw, cfg.theta)))

    print("\n=== 2. Cleanup stages ===")
    stage = binarize(raw, cfg.theta)
    print(f"threshold >= {cfg.theta:<18d} {int(stage.sum()):>6d} cells on")
    stage = filter_components(stage, cfg.alpha, cfg.connectivity)
    print(f"drop components < {cfg.alpha} cells   {int(stage.sum()):>6d} cells on")
    cleaned = preprocess_lidar(raw, cfg)
    print(f"smooth + fill holes + crop  {int(cleaned.sum()):>6d} cells on "
          f"({cleaned.shape[1]} x {cleaned.shape[0]})")
    print("\nCleaned mask:")
    print(ascii_mask(cleaned))

    print("\n=== 3. The pipeline is a fixpoint on its own output ===")
    again = preprocess_lidar(cleaned, cfg)
    print(f"preprocess(preprocess(raw)) == preprocess(raw): "
          f"{np.array_equal(again, cleaned)}")

    print("\n=== 4. And the cleaned mask matches the original structure ===")
    ref = crop_to_content(clean, 0)
    same_shape = again.shape == ref.shape
    agree = (np.mean(again == ref) if same_shape else 0.0)
    print(f"shape {again.shape} vs clean crop {ref.shape}; "
          f"cellwise agreement {agree:.1%}")


if __name__ == "__main__":
    main()
