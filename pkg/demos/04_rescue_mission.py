#!/usr/bin/env python3
"""Search a building for victims, with and without its floor plan.

Two missions run in the same simulated apartment with identical sensors
and motion noise. The plan-guided robot registers its growing scan map
onto the floor plan, plans routes through rooms it has never seen, and
re-registers whenever reality disagrees with the plan or it has driven
far enough for drift to matter. The baseline robot has no plan and
explores by driving to the nearest frontier of its map.

The building here is adversarial on purpose: the plan says the door
between room_a and room_c is open, but in reality it is closed, so the
direct route fails and the plan-guided robot must notice, re-register,
and detour through room_b.

Run from the repository root:

    python3 demos/04_rescue_mission.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from planreg import datagen
from planreg import simulator as sim

OUT = Path(__file__).resolve().parent / "output"

# Hand-authored apartment. The living room is L-shaped and room_c stops
# short of the full footprint, so the outline has no symmetry and every
# registration is unambiguous. Distances are plan units; one unit is
# 0.08 units_per_cell at plan scale and 4 world cells at mission scale.
WORLD = {
    "plan": {
        "units_per_cell": 0.08,
        "rooms": [
            {"name": "living", "kind": "living_room",
             "corners": [[0, 0], [4, 0], [4, 4], [6, 4], [6, 8], [0, 8]]},
            {"name": "room_a", "kind": "other",
             "corners": [[4, 0], [8, 0], [8, 4], [4, 4]]},
            {"name": "room_b", "kind": "bedroom",
             "corners": [[6, 4], [8, 4], [8, 8], [6, 8]]},
            {"name": "room_c", "kind": "bedroom",
             "corners": [[8, 0], [12, 0], [12, 6], [8, 6]]},
        ],
    },
    "resolution_cells_per_unit": 4.0,
    "doors": [
        {"id": "d_live_a", "from": "living", "to": "room_a",
         "segment": [[4.0, 1.5], [4.0, 2.5]], "closed": False},
        {"id": "d_live_b", "from": "living", "to": "room_b",
         "segment": [[6.0, 5.5], [6.0, 6.5]], "closed": False},
        {"id": "d_a_c", "from": "room_a", "to": "room_c",
         "segment": [[8.0, 1.5], [8.0, 2.5]], "closed": True},  # surprise!
        {"id": "d_b_c", "from": "room_b", "to": "room_c",
         "segment": [[8.0, 4.5], [8.0, 5.5]], "closed": False},
    ],
    "targets": [{"x": 10.0, "y": 2.0, "room": "room_c"}],
    "start": {"x": 2.0, "y": 4.0, "heading": 0.0},
}


def describe(tag: str, log: sim.MissionLog) -> None:
    found = ", ".join(t["room"] for t in log.targets_found) or "none"
    print(f"  {tag:<12s} status={log.status}  time={log.total_time_s:6.1f} s  "
          f"distance={log.distance_cells:6.1f} cells")
    print(f"  {'':<12s} targets found in: {found}")
    print(f"  {'':<12s} registrations={log.registrations} "
          f"(obstruction-triggered={log.obstruction_registrations}, "
          f"travel-triggered={log.distance_registrations}), "
          f"replans={log.replans}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    world = sim.world_from_dict(WORLD)
    print("=== 1. One apartment, one victim, a door the plan lies about ===")
    print(f"Grid {world.grid.shape[1]} x {world.grid.shape[0]} cells; "
          f"start in '{world.room_at(world.start)}', "
          f"victim in '{world.targets[0].room}'.")

    print("\n=== 2. Plan-guided mission ===")
    log_plan = sim.run_plan_slam(world, world.plan, sim.MotionConfig(rng_seed=0))
    describe("plan-guided", log_plan)
    print("\nThe single obstruction-triggered registration is the closed "
          "door being hit;\nthe mission re-anchors its map and routes "
          "through room_b instead.")

    print("\n=== 3. Frontier baseline in the same world ===")
    log_base = sim.run_frontier_baseline(world, sim.MotionConfig(rng_seed=0))
    describe("baseline", log_base)
    print("\nIn a four-room flat the baseline can get lucky -- here its "
          "frontier sweep\nwanders straight to the victim while the guided "
          "robot pays for registrations\nand the detour. The value of the "
          "plan shows up at scale, below.")

    print("\n=== 4. Mission logs are replayable artifacts ===")
    log_path = OUT / "mission_plan_guided.jsonl"
    log_path.write_text(log_plan.to_jsonl())
    (OUT / "mission_plan_guided.summary.json").write_text(
        json.dumps(log_plan.summary_dict(), indent=2) + "\n")
    first = json.loads(log_plan.to_jsonl().splitlines()[0])
    print(f"{len(log_plan.trajectory)} ticks -> {log_path}")
    print(f"first tick: {json.dumps(first)}")

    print("\n=== 5. Head-to-head over generated apartments ===")
    rng = np.random.default_rng(2026)
    total_plan, total_base, wins = 0.0, 0.0, 0
    print(f"  {'world':<8s}{'rooms':>6s}{'plan-guided':>14s}{'baseline':>11s}")
    for i in range(5):
        doc = datagen.gen_world_dict(rng, n_rooms=5 + i % 3)
        w = sim.world_from_dict(doc)
        cfg = sim.MotionConfig(rng_seed=i)
        tp = sim.run_plan_slam(w, w.plan, cfg).total_time_s
        tb = sim.run_frontier_baseline(w, cfg).total_time_s
        total_plan, total_base = total_plan + tp, total_base + tb
        wins += tp < tb
        print(f"  {i:<8d}{len(w.plan.rooms):>6d}{tp:>12.1f} s{tb:>9.1f} s")
    saving = 1.0 - total_plan / total_base
    print(f"\nPlan-guided won {wins}/5 worlds; total mission time "
          f"{total_plan:.1f} s vs {total_base:.1f} s ({saving:.0%} saved).")


if __name__ == "__main__":
    main()
