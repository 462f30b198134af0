"""World building, sensing, mapping, planning, and full missions."""

import json
import math

import numpy as np
import pytest

import oracles
from conftest import closed_door_world_doc, open_world_doc
from planreg import simulator as sim
from planreg.errors import (InvalidPoseError, LocalizationError, SchemaError,
                            UnreachableGoalError)
from planreg.pgm import FREE_CELL, OCCUPIED_CELL, UNKNOWN_CELL


@pytest.fixture(scope="module")
def closed_world():
    return sim.world_from_dict(closed_door_world_doc())


@pytest.fixture(scope="module")
def open_world():
    return sim.world_from_dict(open_world_doc())


class TestPose:
    def test_cell_floors_coordinates(self):
        assert sim.Pose(3.7, 9.2).cell() == (9, 3)
        assert sim.Pose(-0.5, 2.0).cell() == (2, -1)


class TestWorldBuilding:
    def test_grid_codes_and_shapes(self, open_world):
        w = open_world
        assert set(np.unique(w.grid)) <= {sim.W_FREE, sim.W_WALL, sim.W_DOOR}
        assert w.grid.shape == w.blocked.shape == w.room_labels.shape

    def test_blocked_is_walls_plus_closed_doors(self, closed_world):
        w = closed_world
        expected = w.grid == sim.W_WALL
        closed = next(d for d in w.doors if d.closed)
        cells = w.door_cells[closed.id]
        expected = expected.copy()
        expected[cells[:, 0], cells[:, 1]] = True
        assert np.array_equal(w.blocked, expected)

    def test_open_doors_are_not_blocked(self, open_world):
        for door in open_world.doors:
            cells = open_world.door_cells[door.id]
            assert not open_world.blocked[cells[:, 0], cells[:, 1]].any()

    def test_coordinate_roundtrip(self, open_world):
        for x, y in [(0.0, 0.0), (3.25, 7.5), (12.0, 6.0)]:
            wx, wy = open_world.plan_to_world(x, y)
            px, py = open_world.world_to_plan(wx, wy)
            assert (px, py) == pytest.approx((x, y))

    def test_room_labels_match_geometry(self, open_world):
        w = open_world
        # the cell at each room's center must carry that room's label
        for room in w.plan.rooms:
            cx = float(np.mean(room.outline[:, 0]))
            cy = float(np.mean(room.outline[:, 1]))
            wx, wy = w.plan_to_world(cx, cy)
            assert w.room_at(sim.Pose(wx, wy)) == room.name
        assert w.room_at(sim.Pose(0.5, 0.5)) is None  # margin cell

    def test_targets_and_start_in_world_cells(self, open_world):
        w = open_world
        tx, ty = w.plan_to_world(10.0, 2.0)
        assert w.targets[0].x == pytest.approx(tx)
        assert w.targets[0].y == pytest.approx(ty)
        assert not w.blocked[w.start.cell()]


class TestWorldSchema:
    def test_valid_document_builds(self):
        assert sim.world_from_dict(closed_door_world_doc()) is not None

    @pytest.mark.parametrize("mutate,match", [
        (lambda d: d.pop("plan"), "plan"),
        (lambda d: d.update(resolution_cells_per_unit=0), "resolution"),
        (lambda d: d["doors"][0].pop("segment"), "doors"),
        (lambda d: d["doors"][0].update({"from": "nowhere"}), "unknown rooms"),
        (lambda d: d.update(targets=[]), "target"),
        (lambda d: d["targets"][0].pop("x"), "targets"),
        (lambda d: d.update(targets=[{"x": 1, "y": 1, "room": "nope"}]),
         "unknown room"),
        (lambda d: d.pop("start"), "start"),
        (lambda d: d.update(start={"x": "a", "y": 0}), "start"),
    ])
    def test_schema_errors(self, mutate, match):
        doc = closed_door_world_doc()
        mutate(doc)
        with pytest.raises(SchemaError, match=match):
            sim.world_from_dict(doc)

    def test_start_inside_wall_rejected(self):
        doc = closed_door_world_doc()
        doc["start"] = {"x": 0.0, "y": 0.0, "heading": 0.0}  # on a corner wall
        with pytest.raises(SchemaError, match="start"):
            sim.world_from_dict(doc)

    def test_door_must_touch_a_wall(self):
        doc = closed_door_world_doc()
        doc["doors"][0]["segment"] = [[2.0, 2.0], [2.0, 2.5]]  # mid-room
        with pytest.raises(SchemaError, match="wall"):
            sim.world_from_dict(doc)

    def test_invalid_json_text(self):
        with pytest.raises(SchemaError, match="JSON"):
            sim.parse_world("[not json")


class TestRaycast:
    def test_matches_scalar_oracle_exactly(self, closed_world):
        w = closed_world
        poses = [w.start,
                 sim.Pose(w.start.x + 3.0, w.start.y - 2.0, 0.7),
                 sim.Pose(w.start.x - 1.5, w.start.y + 4.0, -2.1)]
        for pose in poses:
            scan = sim.raycast_scan(w, pose, n_beams=90, max_range=30.0,
                                    step=0.25)
            ranges, hits = oracles.scan_ranges_reference(
                w.blocked, pose.x, pose.y, pose.heading, 90, 30.0, 0.25)
            assert np.array_equal(scan.hits, hits)
            assert np.array_equal(scan.ranges, ranges)

    def test_blocked_pose_rejected(self, closed_world):
        wall = np.argwhere(closed_world.blocked)[0]
        with pytest.raises(InvalidPoseError):
            sim.raycast_scan(closed_world,
                             sim.Pose(wall[1] + 0.5, wall[0] + 0.5))
        outside = sim.Pose(-5.0, -5.0)
        with pytest.raises(InvalidPoseError):
            sim.raycast_scan(closed_world, outside)

    def test_max_range_when_nothing_hit(self):
        doc = open_world_doc()
        world = sim.world_from_dict(doc)
        scan = sim.raycast_scan(world, world.start, n_beams=8, max_range=2.0)
        assert not scan.hits.any()
        assert (scan.ranges == 2.0).all()


class TestLineOfSight:
    def test_clear_within_a_room(self, open_world):
        w = open_world
        p = (w.start.x, w.start.y)
        q = (w.start.x + 2.0, w.start.y + 2.0)
        assert sim.line_of_sight(w, p, q)

    def test_blocked_through_a_wall(self, closed_world):
        w = closed_world
        p = w.plan_to_world(2.0, 0.5)
        q = w.plan_to_world(6.0, 0.5)  # crosses the living/room_a wall
        assert not sim.line_of_sight(w, p, q)

    def test_short_segments_always_clear(self, open_world):
        p = (open_world.start.x, open_world.start.y)
        assert sim.line_of_sight(open_world, p, (p[0] + 0.1, p[1]))


class TestIntegrateScan:
    def test_beam_cells_marked(self, open_world):
        w = open_world
        occupancy = np.full(w.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        scan = sim.raycast_scan(w, w.start)
        sim.integrate_scan(occupancy, w.start, scan)
        assert (occupancy == FREE_CELL).sum() > 100
        assert (occupancy == OCCUPIED_CELL).sum() > 20
        assert occupancy[w.start.cell()] == FREE_CELL
        # every hit endpoint is occupied
        hit = np.flatnonzero(scan.hits)
        hx = w.start.x + np.cos(scan.angles[hit]) * scan.ranges[hit]
        hy = w.start.y + np.sin(scan.angles[hit]) * scan.ranges[hit]
        assert (occupancy[np.floor(hy).astype(int),
                          np.floor(hx).astype(int)] == OCCUPIED_CELL).all()

    def test_occupied_cells_latch(self, open_world):
        w = open_world
        occupancy = np.full(w.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        scan = sim.raycast_scan(w, w.start)
        sim.integrate_scan(occupancy, w.start, scan)
        before = (occupancy == OCCUPIED_CELL)
        # integrate a second scan from a nearby pose: grazing beams must
        # never flip an occupied cell back to free
        pose2 = sim.Pose(w.start.x + 1.0, w.start.y + 0.5)
        scan2 = sim.raycast_scan(w, pose2)
        sim.integrate_scan(occupancy, pose2, scan2)
        still = (occupancy == OCCUPIED_CELL)
        assert (before & ~still).sum() == 0

    def test_known_never_reverts_to_unknown(self, open_world):
        w = open_world
        occupancy = np.full(w.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        scan = sim.raycast_scan(w, w.start)
        sim.integrate_scan(occupancy, w.start, scan)
        known_before = occupancy != UNKNOWN_CELL
        sim.integrate_scan(occupancy, w.start, scan)
        known_after = occupancy != UNKNOWN_CELL
        assert (known_before & ~known_after).sum() == 0


class TestStepMotion:
    def test_noise_free_euler_update(self):
        cfg = sim.MotionConfig(noise_sigma_xy=0.0, noise_sigma_heading=0.0)
        rng = np.random.default_rng(0)
        pose = sim.step_motion(sim.Pose(1.0, 2.0, math.pi / 2), (2.0, 0.0),
                               1.0, cfg, rng)
        assert pose.x == pytest.approx(1.0)
        assert pose.y == pytest.approx(4.0)
        assert pose.heading == pytest.approx(math.pi / 2)

    def test_seeded_noise_is_reproducible(self):
        cfg = sim.MotionConfig(noise_sigma_xy=0.1)
        p1 = sim.step_motion(sim.Pose(0, 0, 0), (1, 0), 1.0, cfg,
                             np.random.default_rng(5))
        p2 = sim.step_motion(sim.Pose(0, 0, 0), (1, 0), 1.0, cfg,
                             np.random.default_rng(5))
        assert p1 == p2

    def test_rng_stream_advances_regardless_of_sigma(self):
        # the same number of variates must be drawn whatever the sigmas,
        # so runs stay comparable across noise settings
        cfg_quiet = sim.MotionConfig(noise_sigma_xy=0.0)
        cfg_noisy = sim.MotionConfig(noise_sigma_xy=1.0)
        rng_a, rng_b = np.random.default_rng(6), np.random.default_rng(6)
        sim.step_motion(sim.Pose(0, 0, 0), (1, 0), 1.0, cfg_quiet, rng_a)
        sim.step_motion(sim.Pose(0, 0, 0), (1, 0), 1.0, cfg_noisy, rng_b)
        assert rng_a.random() == rng_b.random()


class TestPathPlanning:
    def _random_grid(self, rng, shape=(25, 25), p_free=0.7):
        trav = rng.random(shape) < p_free
        trav[0, 0] = True
        return trav

    def test_path_cost_matches_dijkstra_oracle(self):
        rng = np.random.default_rng(19)
        checked = 0
        while checked < 5:
            trav = self._random_grid(rng)
            field = oracles.dijkstra_reference(trav, (0, 0))
            reachable = np.argwhere(np.isfinite(field) & trav)
            goal = tuple(reachable[int(rng.integers(len(reachable)))])
            path = sim.plan_path(trav, (0, 0), goal)
            assert path[0] == (0, 0) and path[-1] == goal
            assert oracles.path_cost(path) == pytest.approx(
                field[goal], abs=1e-9)
            checked += 1

    def test_dijkstra_field_matches_oracle(self):
        rng = np.random.default_rng(20)
        trav = self._random_grid(rng, (20, 20))
        got = sim.dijkstra_field(trav, (0, 0))
        want = oracles.dijkstra_reference(trav, (0, 0))
        finite = np.isfinite(want)
        assert np.array_equal(np.isfinite(got), finite)
        assert np.allclose(got[finite], want[finite], atol=1e-9)

    def test_no_diagonal_corner_cutting(self):
        trav = np.ones((3, 3), dtype=bool)
        trav[0, 1] = trav[1, 0] = False
        with pytest.raises(UnreachableGoalError):
            sim.plan_path(trav, (0, 0), (2, 2))

    def test_trivial_and_error_cases(self):
        trav = np.ones((4, 4), dtype=bool)
        assert sim.plan_path(trav, (1, 1), (1, 1)) == [(1, 1)]
        trav[2, :] = False
        with pytest.raises(UnreachableGoalError):
            sim.plan_path(trav, (0, 0), (3, 3))
        with pytest.raises(UnreachableGoalError):
            sim.plan_path(trav, (2, 0), (0, 0))  # blocked start
        with pytest.raises(UnreachableGoalError):
            sim.plan_path(trav, (0, 0), (9, 9))  # outside


class TestLocalize:
    def test_recovers_planted_offset(self):
        rng = np.random.default_rng(21)
        walls = rng.random((40, 40)) < 0.12
        walls[:8, :] = False  # keep an empty corner so offsets are unambiguous
        patch_origin = (10, 10)
        patch = walls[10:22, 10:24].copy()
        for dy, dx in [(0, 0), (1, -2), (-2, 2)]:
            prior = sim.Pose(15.0 + dx, 15.0 + dy)
            shifted_origin = (patch_origin[0] + dy, patch_origin[1] + dx)
            corrected = sim.localize(patch, shifted_origin, walls, prior,
                                     radius=2)
            assert corrected.x == pytest.approx(15.0)
            assert corrected.y == pytest.approx(15.0)

    def test_error_when_nothing_matches(self):
        walls = np.zeros((20, 20), dtype=bool)
        patch = np.ones((3, 3), dtype=bool)
        with pytest.raises(LocalizationError):
            sim.localize(patch, (5, 5), walls, sim.Pose(6, 6), radius=2)

    def test_error_on_empty_patch(self):
        walls = np.ones((10, 10), dtype=bool)
        with pytest.raises(LocalizationError):
            sim.localize(np.zeros((3, 3), dtype=bool), (2, 2), walls,
                         sim.Pose(3, 3))


class TestPlanBelief:
    def test_full_observation_places_plan_accurately(self, open_world):
        w = open_world
        occupancy = np.full(w.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        interior = w.room_labels > 0
        occupancy[interior & ~w.blocked] = FREE_CELL
        occupancy[w.blocked] = OCCUPIED_CELL
        belief = sim.PlanBelief(w.plan, w.doors, w.grid.shape,
                                sim.MotionConfig())
        result = belief.update(occupancy)
        assert (result.transform.rot, result.transform.flip) == (0, False)
        # plan corners must land close to their true world cells
        for room in w.plan.rooms:
            for x, y in room.outline:
                wx, wy = w.plan_to_world(float(x), float(y))
                pt = belief.world_point_of_plan_point(float(x), float(y))
                err = math.hypot(pt[1] - wx, pt[0] - wy)
                assert err <= 2.5

    def test_believed_walls_hug_true_walls(self, open_world):
        w = open_world
        occupancy = np.full(w.grid.shape, UNKNOWN_CELL, dtype=np.int8)
        interior = w.room_labels > 0
        occupancy[interior & ~w.blocked] = FREE_CELL
        occupancy[w.blocked] = OCCUPIED_CELL
        belief = sim.PlanBelief(w.plan, w.doors, w.grid.shape,
                                sim.MotionConfig())
        belief.update(occupancy)
        assert belief.walls_world.any()
        true_wall_cells = np.argwhere(w.grid != sim.W_FREE)
        believed = np.argwhere(belief.walls_world)
        dists = []
        for r, c in believed:
            d = np.min(np.hypot(true_wall_cells[:, 0] - r,
                                true_wall_cells[:, 1] - c))
            dists.append(d)
        assert float(np.mean(dists)) <= 1.5

    def test_no_placement_before_first_update(self, open_world):
        belief = sim.PlanBelief(open_world.plan, open_world.doors,
                                open_world.grid.shape, sim.MotionConfig())
        assert belief.world_point_of_plan_point(1.0, 1.0) is None


class TestMissions:
    def test_plan_mission_finds_target_in_open_world(self, open_world):
        log = sim.run_plan_slam(open_world, open_world.plan,
                                sim.MotionConfig(rng_seed=0))
        assert log.status == "ok"
        assert len(log.targets_found) == 1
        assert log.registrations >= 1
        assert log.total_time_s > 0

    def test_baseline_explores_without_registrations(self, open_world):
        log = sim.run_frontier_baseline(open_world,
                                        sim.MotionConfig(rng_seed=0))
        assert log.status == "ok"
        assert len(log.targets_found) == 1
        assert log.registrations == 0
        assert log.mode == "baseline"

    def test_closed_door_triggers_exactly_one_obstruction_replan(
            self, closed_world):
        log = sim.run_plan_slam(closed_world, closed_world.plan,
                                sim.MotionConfig(rng_seed=0))
        assert log.status == "ok"
        assert len(log.targets_found) == 1
        assert log.obstruction_registrations == 1

    def test_unknown_target_count_sweeps_rooms(self, open_world):
        scenario = sim.Scenario(targets_known=False)
        log = sim.run_plan_slam(open_world, open_world.plan,
                                sim.MotionConfig(rng_seed=0), scenario)
        assert log.status == "ok"
        assert len(log.rooms_visited) >= 3

    def test_mission_rerun_is_bit_identical(self, open_world):
        cfg = sim.MotionConfig(rng_seed=3)
        log1 = sim.run_plan_slam(open_world, open_world.plan, cfg)
        log2 = sim.run_plan_slam(open_world, open_world.plan, cfg)
        assert log1.to_jsonl() == log2.to_jsonl()
        assert log1.summary_dict() == log2.summary_dict()
        base1 = sim.run_frontier_baseline(open_world, cfg)
        base2 = sim.run_frontier_baseline(open_world, cfg)
        assert base1.to_jsonl() == base2.to_jsonl()

    def test_time_cap_produces_timeout_status(self, open_world):
        scenario = sim.Scenario(time_cap_s=3.0)
        log = sim.run_plan_slam(open_world, open_world.plan,
                                sim.MotionConfig(rng_seed=0), scenario)
        assert log.status == "timeout"

    def test_log_lines_are_json(self, open_world):
        log = sim.run_frontier_baseline(open_world, sim.MotionConfig())
        lines = log.to_jsonl().strip().split("\n")
        assert len(lines) == len(log.trajectory)
        first = json.loads(lines[0])
        assert set(first) >= {"t", "true", "est", "d", "s_remaining"}
