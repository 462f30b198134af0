"""Shared fixtures: hand-authored worlds and generated plans."""

from __future__ import annotations

import copy

import numpy as np
import pytest

from planreg import datagen

# Hand-authored world with an L-shaped footprint (the notch keeps every
# symmetry of the building outline distinguishable) and a secretly
# closed door. The direct route from the start to the target runs
# living -> room_a -> room_c through the closed door; the detour runs
# living -> room_b -> room_c. The closed door is out of line of sight
# from the start, so a mission discovers it only en route.
CLOSED_DOOR_WORLD = {
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
         "segment": [[8.0, 1.5], [8.0, 2.5]], "closed": True},
        {"id": "d_b_c", "from": "room_b", "to": "room_c",
         "segment": [[8.0, 4.5], [8.0, 5.5]], "closed": False},
    ],
    "targets": [{"x": 10.0, "y": 2.0, "room": "room_c"}],
    "start": {"x": 2.0, "y": 4.0, "heading": 0.0},
}


def closed_door_world_doc() -> dict:
    return copy.deepcopy(CLOSED_DOOR_WORLD)


def open_world_doc() -> dict:
    """Same world with every door open."""
    doc = closed_door_world_doc()
    for door in doc["doors"]:
        door["closed"] = False
    return doc


@pytest.fixture(scope="session")
def asym_plan():
    """One generated asymmetric rectilinear plan, reused across tests."""
    rng = np.random.default_rng(11)
    plan, _ = datagen.gen_floorplan(rng, n_rooms=5)
    return plan


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A tiny generated registration dataset on disk."""
    out = tmp_path_factory.mktemp("dataset")
    stems = datagen.generate_dataset(out, n_cases=4, levels=(1.0,), seed=5)
    return out, stems
