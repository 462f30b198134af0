"""Acceptance gate: one test per shipped guarantee, one printed line each.

Run with `pytest tests/test_acceptance.py -rA` to see every verdict line.
Each test computes its metrics, prints a single PASS/FAIL line, then
asserts, so the verdict is visible even when a criterion fails.
"""

import json
import math
import time

import numpy as np
import pytest

import oracles
from conftest import closed_door_world_doc, open_world_doc
from planreg import datagen, floorplan, raster, registration
from planreg import simulator as sim
from planreg.cli import main
from planreg.registration import d4_compose, d4_from_id

ASYM = np.array([
    [1, 1, 1, 0, 0],
    [1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0],
    [1, 1, 0, 0, 0],
], dtype=np.uint8)


def _verdict(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'} {name}: {detail}")


@pytest.fixture(scope="module")
def oracle_suite():
    """50 full-completeness cases with known transform + scale, scored."""
    rng = np.random.default_rng(101)
    cases = [datagen.make_registration_case(rng, 1.0) for _ in range(50)]
    eval_cases = [registration.EvalCase(c.plan, c.lidar, c.truth)
                  for c in cases]
    t0 = time.perf_counter()
    report = registration.evaluate(eval_cases)
    suite_s = time.perf_counter() - t0
    return cases, report, suite_s


@pytest.fixture(scope="module")
def completeness_reports():
    """25 cases at each completeness level, evaluated per level."""
    reports = {}
    for level in (0.5, 0.7, 0.9, 1.0):
        rng = np.random.default_rng(200 + int(level * 100))
        cases = [datagen.make_registration_case(rng, level)
                 for _ in range(25)]
        reports[level] = registration.evaluate(
            [registration.EvalCase(c.plan, c.lidar, c.truth) for c in cases])
    return reports


def test_criterion_1_oracle_registration(oracle_suite):
    cases, report, suite_s = oracle_suite
    max_scale_err = max(max(m.s_h_error, m.s_v_error) for m in report.cases)
    ok = (report.rotation_accuracy >= 0.95 and report.fold_accuracy >= 0.95
          and max_scale_err <= 0.05 and suite_s < 60.0)
    _verdict(1, "known-transform registration (50 cases)", ok,
             f"rotation {report.rotation_accuracy:.1%}, "
             f"fold {report.fold_accuracy:.1%}, "
             f"max scale error {max_scale_err:.2%}, suite {suite_s:.1f}s")
    assert report.rotation_accuracy >= 0.95
    assert report.fold_accuracy >= 0.95
    assert max_scale_err <= 0.05
    assert suite_s < 60.0


def test_criterion_2_completeness_trend(completeness_reports):
    levels = sorted(completeness_reports)
    mean_iou = {lv: float(np.mean([m.iou for m in
                                   completeness_reports[lv].cases]))
                for lv in levels}
    drops = [max(0.0, mean_iou[a] - mean_iou[b])
             for a, b in zip(levels, levels[1:])]
    iou_a_full = completeness_reports[1.0].iou_a
    trend_ok = max(drops, default=0.0) <= 0.01 \
        and sum(d > 0 for d in drops) <= 1
    ok = trend_ok and iou_a_full >= 0.94
    detail = ", ".join(f"{lv:.1f}:{mean_iou[lv]:.3f}" for lv in levels)
    _verdict(2, "coverage-vs-quality trend (4x25 cases)", ok,
             f"mean IoU by completeness {detail}; "
             f"room-level IoU at 1.0 = {iou_a_full:.3f}")
    assert trend_ok, f"fused IoU not non-decreasing: {mean_iou}"
    assert iou_a_full >= 0.94


def test_criterion_3_latency(oracle_suite):
    cases, report, _ = oracle_suite
    variant_counts = [len(floorplan.variant_room_subsets(c.plan))
                      for c in cases]
    ok = report.mean_time_s <= 1.0 and max(variant_counts) <= 64
    _verdict(3, "registration latency", ok,
             f"mean {report.mean_time_s * 1000:.1f} ms per case, "
             f"max {max(variant_counts)} variants")
    assert max(variant_counts) <= 64
    assert report.mean_time_s <= 1.0


def test_criterion_4_geometry_raster_equivalence():
    from planreg.geometry import shoelace_area

    rng = np.random.default_rng(400)
    worst_rel = 0.0
    for _ in range(100):
        n_vertices = int(rng.integers(6, 16))
        poly = oracles.convex_polygon(rng, (110.0, 110.0), (55.0, 100.0),
                                      n_vertices)
        area = shoelace_area(poly)
        count = oracles.scanline_interior_count(poly, (220, 220))
        worst_rel = max(worst_rel, abs(count - area) / area)
    area_ok = worst_rel <= 0.02

    iou_ok = True
    for _ in range(3):
        a = (rng.random((50, 50)) < 0.35).astype(np.uint8)
        b = (rng.random((50, 50)) < 0.35).astype(np.uint8)
        got = raster.mask_iou(a, b)
        _, inter, union = oracles.brute_iou(a, b)
        iou_ok &= (got.intersection, got.union) == (inter, union)

    filter_ok = True
    for conn in (4, 8):
        mask = (rng.random((40, 40)) < 0.3).astype(np.uint8)
        got = raster.filter_components(mask, 5, conn)
        want = oracles.filter_small_components(mask, 5, conn)
        filter_ok &= bool(np.array_equal(got, want))

    ok = area_ok and iou_ok and filter_ok
    _verdict(4, "geometry/raster dual-route equivalence", ok,
             f"worst area gap {worst_rel:.2%} over 100 polygons; "
             f"IoU exact: {iou_ok}; component filter exact: {filter_ok}")
    assert area_ok and iou_ok and filter_ok


def test_criterion_5_d4_group():
    transforms = set()
    for i in range(8):
        arr = raster.apply_d4(ASYM, *d4_from_id(i))
        transforms.add((arr.shape, arr.tobytes()))
    distinct_ok = len(transforms) == 8

    table_ok = True
    for i in range(8):
        for j in range(8):
            g1, g2 = d4_from_id(i), d4_from_id(j)
            via_masks = raster.apply_d4(raster.apply_d4(ASYM, *g1), *g2)
            via_law = raster.apply_d4(ASYM, *d4_compose(g1, g2))
            table_ok &= bool(np.array_equal(via_masks, via_law))

    rng = np.random.default_rng(500)
    equivariance_ok = True
    for _ in range(20):
        plan, _ = datagen.gen_floorplan(rng, int(rng.integers(4, 7)))
        scan = floorplan.render_variant(plan, [r.name for r in plan.rooms])
        base = registration.register(scan, plan)
        g0 = (base.transform.rot, base.transform.flip)
        renders = registration.PlanRenderSet(plan)
        for ident in range(8):
            extra = d4_from_id(ident)
            moved = registration.register(raster.apply_d4(scan, *extra),
                                          plan, renders=renders)
            got = (moved.transform.rot, moved.transform.flip)
            equivariance_ok &= got == d4_compose(g0, extra)

    ok = distinct_ok and table_ok and equivariance_ok
    _verdict(5, "symmetry group correctness", ok,
             f"8 distinct: {distinct_ok}; composition table: {table_ok}; "
             f"argmax equivariance on 20 plans: {equivariance_ok}")
    assert distinct_ok and table_ok and equivariance_ok


def test_criterion_6a_closed_door_single_obstruction():
    world = sim.world_from_dict(closed_door_world_doc())
    log = sim.run_plan_slam(world, world.plan, sim.MotionConfig(rng_seed=0))
    ok = (log.status == "ok" and len(log.targets_found) == 1
          and log.obstruction_registrations == 1)
    _verdict(6, "closed-door obstruction handling", ok,
             f"status {log.status}, targets {len(log.targets_found)}/1, "
             f"obstruction re-registrations {log.obstruction_registrations} "
             f"(want exactly 1)")
    assert log.status == "ok"
    assert len(log.targets_found) == 1
    assert log.obstruction_registrations == 1


def test_criterion_6b_distance_triggered_relocalization():
    total_dist = 0.0
    worst_err = 0.0
    triggers = 0
    for seed in range(8):
        rng = np.random.default_rng(3000 + seed)
        doc = datagen.gen_world_dict(rng, n_rooms=7, n_targets=3)
        world = sim.world_from_dict(doc)
        cfg = sim.MotionConfig(rng_seed=seed, noise_sigma_xy=0.05)
        log = sim.run_plan_slam(world, world.plan, cfg)
        prev = None
        for rec in log.trajectory:
            if prev is not None:
                total_dist += math.hypot(rec.true_pose[0] - prev[0],
                                         rec.true_pose[1] - prev[1])
            prev = rec.true_pose
            if "registration:distance" in rec.events:
                err = math.hypot(rec.est_pose[0] - rec.true_pose[0],
                                 rec.est_pose[1] - rec.true_pose[1])
                worst_err = max(worst_err, err)
                triggers += 1
    ok = total_dist >= 500.0 and triggers >= 1 and worst_err <= 2.0
    _verdict(6, "travel-triggered relocalization", ok,
             f"trajectory {total_dist:.0f} cells, {triggers} distance "
             f"triggers, worst position error {worst_err:.2f} cells "
             f"(cap 2.0) at noise 0.05")
    assert total_dist >= 500.0
    assert triggers >= 1
    assert worst_err <= 2.0


def test_criterion_7_mission_time_savings():
    rng = np.random.default_rng(2026)
    rows = []
    plan_total = baseline_total = 0.0
    for i in range(5):
        doc = datagen.gen_world_dict(rng, n_rooms=5 + i % 3)
        world = sim.world_from_dict(doc)
        cfg = sim.MotionConfig(rng_seed=i)
        log_plan = sim.run_plan_slam(world, world.plan, cfg)
        log_base = sim.run_frontier_baseline(world, cfg)
        rows.append((len(world.plan.rooms), log_plan, log_base))
        plan_total += log_plan.total_time_s
        baseline_total += log_base.total_time_s
    wins = sum(p.total_time_s < b.total_time_s for _, p, b in rows)
    statuses_ok = all(p.status == "ok" and b.status == "ok"
                      for _, p, b in rows)
    rooms_ok = all(n >= 5 for n, _, _ in rows)
    saving = 1.0 - plan_total / baseline_total
    ok = wins == 5 and statuses_ok and rooms_ok and saving >= 0.05
    per_world = " ".join(f"{p.total_time_s:.0f}<{b.total_time_s:.0f}"
                         for _, p, b in rows)
    _verdict(7, "plan-guided vs frontier mission time (5 worlds)", ok,
             f"wins {wins}/5 ({per_world}), aggregate saving {saving:.1%} "
             f"(floor 5%)")
    assert rooms_ok
    assert statuses_ok
    assert wins == 5, per_world
    assert saving >= 0.05


def test_criterion_8_determinism(tmp_path):
    # library level: registration and both mission modes
    rng = np.random.default_rng(801)
    case = datagen.make_registration_case(rng, 1.0)
    r1 = registration.register(case.lidar, case.plan).to_dict()
    r2 = registration.register(case.lidar, case.plan).to_dict()
    register_ok = r1 == r2

    world = sim.world_from_dict(open_world_doc())
    cfg = sim.MotionConfig(rng_seed=4)
    mission_ok = (
        sim.run_plan_slam(world, world.plan, cfg).to_jsonl()
        == sim.run_plan_slam(world, world.plan, cfg).to_jsonl()
        and sim.run_frontier_baseline(world, cfg).to_jsonl()
        == sim.run_frontier_baseline(world, cfg).to_jsonl())

    # command level: generated datasets and evaluation reports
    out1, out2 = tmp_path / "d1", tmp_path / "d2"
    for out in (out1, out2):
        assert main(["gen", "--out", str(out), "--cases", "2",
                     "--levels", "1.0", "--seed", "80"]) == 0
    gen_ok = all((out2 / f.name).read_bytes() == f.read_bytes()
                 for f in sorted(out1.iterdir()))

    reports = []
    for name in ("e1.json", "e2.json"):
        out = tmp_path / name
        assert main(["evaluate", "--data", str(out1),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        doc.pop("mean_time_s")  # wall time is the one excluded field
        for entry in doc["cases"]:
            entry.pop("time_s")
        reports.append(doc)
    evaluate_ok = reports[0] == reports[1]

    ok = register_ok and mission_ok and gen_ok and evaluate_ok
    _verdict(8, "seeded rerun reproducibility", ok,
             f"register: {register_ok}; missions: {mission_ok}; "
             f"dataset files: {gen_ok}; evaluation report "
             f"(excl. wall time): {evaluate_ok}")
    assert register_ok and mission_ok and gen_ok and evaluate_ok
