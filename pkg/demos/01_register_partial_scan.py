#!/usr/bin/env python3
"""Recover how a partial scan maps onto a floor plan.

A scan of a building rarely covers every room, arrives in an arbitrary
orientation (possibly mirrored), and has its own resolution on each
axis. This walkthrough generates a plan and a partial scan whose
placement is known, then recovers that placement by exhaustive search
over room subsets and the eight axis-aligned symmetries.

Run from the repository root:

    python3 demos/01_register_partial_scan.py
"""

from __future__ import annotations

import numpy as np

from planreg import datagen
from planreg.raster import resize_nn
from planreg.registration import PlanRenderSet, register


def ascii_mask(mask: np.ndarray, width: int = 64) -> str:
    """Tiny terminal rendering of a binary mask (# = occupied)."""
    h, w = mask.shape
    out_w = min(width, w)
    out_h = max(1, round(h * out_w / w / 2))  # terminal cells are ~2x tall
    small = resize_nn(mask, out_w, out_h)
    return "\n".join("".join("#" if v else "." for v in row) for row in small)


def main() -> None:
    rng = np.random.default_rng(7)

    print("=== 1. Generate a plan and a partial scan with known placement ===")
    case = datagen.make_registration_case(rng, level=0.9)
    plan, scan, truth = case.plan, case.lidar, case.truth
    print(f"Plan: {len(plan.rooms)} rooms, "
          f"{plan.size()[0]:.1f} x {plan.size()[1]:.1f} units, "
          f"{plan.units_per_cell:.4f} units per grid cell")
    for room in plan.rooms:
        print(f"  {room.name:<10s} {room.kind:<12s} {room.area():6.2f} units^2")
    print(f"\nThe scan covers {len(truth.variant)}/{len(plan.rooms)} rooms "
          f"(~{truth.completeness:.0%} of the floor area) and was placed with"
          f"\n  rotation {truth.rot} deg, mirrored={truth.flip}, "
          f"axis scales ({truth.s_h:.3f}, {truth.s_v:.3f})")
    print(f"\nScan mask ({scan.shape[1]} x {scan.shape[0]} cells):")
    print(ascii_mask(scan))

    print("\n=== 2. Register the scan against the plan ===")
    renders = PlanRenderSet(plan)
    n_candidates = len(renders.subsets) * 8
    print(f"Searching {len(renders.subsets)} room subsets x 8 symmetries "
          f"= {n_candidates} candidates ...")
    result = register(scan, plan, renders)
    t = result.transform
    print(f"Best match: IoU {result.iou:.3f}")

    print("\n=== 3. Compare recovered placement with the planted one ===")
    rows = [
        ("rotation (deg)", truth.rot, t.rot),
        ("mirrored",       truth.flip, t.flip),
        ("scale s_h",      f"{truth.s_h:.3f}", f"{t.s_h:.3f}"),
        ("scale s_v",      f"{truth.s_v:.3f}", f"{t.s_v:.3f}"),
        ("rooms covered",  ",".join(sorted(truth.variant)),
                           ",".join(sorted(result.variant))),
    ]
    print(f"  {'parameter':<14s}  {'planted':<24s}  recovered")
    for name, planted, recovered in rows:
        mark = "ok" if str(planted) == str(recovered) else "DIFFERS"
        print(f"  {name:<14s}  {str(planted):<24s}  {recovered}  [{mark}]")

    print("\n=== 4. Candidate ranking (top 5 of the exhaustive search) ===")
    ranked = sorted(result.candidates, key=lambda c: -c.iou)[:5]
    for i, cand in enumerate(ranked, 1):
        print(f"  {i}. IoU {cand.iou:.3f}  rot {cand.rot:>3d}  "
              f"flip {str(cand.flip):<5s}  rooms {','.join(sorted(cand.variant))}")
    print("\nThe margin between rank 1 and rank 2 is what makes the match "
          "unambiguous;\nplans generated by this package carve notches into "
          "the outline so no two\nsymmetries ever produce the same silhouette.")


if __name__ == "__main__":
    main()
