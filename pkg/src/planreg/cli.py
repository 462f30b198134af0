"""Command line interface: gen, register, evaluate, simulate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datagen, floorplan, pgm, registration, simulator
from .errors import PlanRegError
from .raster import ComponentFilterConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 3

TABLE_COLUMNS = ("Fold Accuracy(%)", "Rotation Accuracy(%)", "IoU_a(%)",
                 "Average Time(s)")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planreg",
        description="Floor-plan registration and rescue-mission simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate plans, scan masks, ground truth")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--cases", type=int, default=20,
                       help="number of registration cases")
    p_gen.add_argument("--levels", default="0.5,0.7,0.9,1.0",
                       help="comma-separated completeness levels to cycle")
    p_gen.add_argument("--worlds", type=int, default=0,
                       help="also generate this many simulation worlds")
    p_gen.add_argument("--seed", type=int, default=0)

    p_reg = sub.add_parser("register", help="register a scan mask onto a plan")
    p_reg.add_argument("--plan", required=True, help="plan JSON file")
    p_reg.add_argument("--lidar", required=True,
                       help="scan PGM (occupied dark, per the mask convention)")
    p_reg.add_argument("--out", help="write the result JSON here (default stdout)")
    p_reg.add_argument("--theta", type=int, default=128,
                       help="binarization threshold")
    p_reg.add_argument("--alpha", type=int, default=50,
                       help="minimum component area in cells")
    p_reg.add_argument("--tolerance", type=float, default=2.0,
                       help="outline simplification tolerance in cells")

    p_eval = sub.add_parser("evaluate", help="score registration over a dataset")
    p_eval.add_argument("--data", required=True,
                        help="directory produced by `planreg gen`")
    p_eval.add_argument("--out", help="write the JSON report here")

    p_sim = sub.add_parser("simulate", help="run a rescue mission in a world")
    p_sim.add_argument("--world", required=True, help="world JSON file")
    p_sim.add_argument("--mode", choices=("plan_slam", "baseline"),
                       default="plan_slam")
    p_sim.add_argument("--targets", choices=("known", "unknown"),
                       default="known", help="is the target count/location known")
    p_sim.add_argument("--out", required=True, help="mission log JSONL path")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--timeout-s", type=float, default=600.0,
                       help="simulated-time cap for the mission")
    return parser


def cmd_gen(args: argparse.Namespace) -> int:
    levels = tuple(float(v) for v in args.levels.split(",") if v)
    if not levels or any(not 0.0 < lv <= 1.0 for lv in levels):
        print("error: levels must lie in (0, 1]", file=sys.stderr)
        return EXIT_ERROR
    stems = datagen.generate_dataset(args.out, args.cases, levels, args.seed)
    print(f"wrote {len(stems)} cases to {args.out}")
    if args.worlds:
        rng = np.random.default_rng(args.seed + 7919)
        for i in range(args.worlds):
            doc = datagen.gen_world_dict(rng)
            datagen.save_world(Path(args.out) / f"world_{i:04d}.json", doc)
        print(f"wrote {args.worlds} worlds to {args.out}")
    return EXIT_OK


def cmd_register(args: argparse.Namespace) -> int:
    plan = floorplan.load_plan(args.plan)
    image = pgm.read_pgm(args.lidar)
    # file convention is occupied = dark; the preprocessing thresholds
    # bright structure, so flip the encoding first
    cfg = ComponentFilterConfig(theta=args.theta, alpha=args.alpha)
    mask = registration.preprocess_lidar(255 - image, cfg, args.tolerance)
    result = registration.register(mask, plan)
    text = json.dumps(result.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"variant={','.join(result.variant)} rot={result.transform.rot} "
          f"flip={result.transform.flip} iou={result.iou:.4f}", file=sys.stderr)
    return EXIT_OK


def _format_table(rows: list[tuple[str, float, float, float, float]]) -> str:
    header = ("Case set", *TABLE_COLUMNS)
    table = [header] + [
        (label, f"{fold * 100:.2f}", f"{rot * 100:.2f}", f"{iou * 100:.2f}",
         f"{time_s:.3f}")
        for label, fold, rot, iou, time_s in rows
    ]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(widths[i])
                               for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def cmd_evaluate(args: argparse.Namespace) -> int:
    stems = datagen.case_stems(args.data)
    if not stems:
        print(f"error: no cases found in {args.data}", file=sys.stderr)
        return EXIT_ERROR
    cases = [datagen.load_case(stem) for stem in stems]
    report = registration.evaluate(cases)

    levels = sorted({m.completeness for m in report.cases})
    rows = []
    for level in levels:
        subset = [m for m in report.cases if m.completeness == level]
        rows.append((f"completeness={level:.2f}",
                     float(np.mean([m.fold_ok for m in subset])),
                     float(np.mean([m.rotation_ok for m in subset])),
                     float(np.mean([m.iou_a for m in subset])),
                     float(np.mean([m.time_s for m in subset]))))
    rows.append(("overall", report.fold_accuracy, report.rotation_accuracy,
                 report.iou_a, report.mean_time_s))
    print(_format_table(rows))

    if args.out:
        doc = {
            "n_cases": report.n_cases,
            "fold_accuracy": report.fold_accuracy,
            "rotation_accuracy": report.rotation_accuracy,
            "iou_a": report.iou_a,
            "mean_time_s": report.mean_time_s,
            "cases": [
                {"rotation_ok": m.rotation_ok, "fold_ok": m.fold_ok,
                 "s_h_error": m.s_h_error, "s_v_error": m.s_v_error,
                 "iou": m.iou, "iou_a": m.iou_a, "time_s": m.time_s,
                 "completeness": m.completeness}
                for m in report.cases
            ],
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    world = simulator.load_world(args.world)
    cfg = simulator.MotionConfig(rng_seed=args.seed)
    scenario = simulator.Scenario(targets_known=args.targets == "known",
                                  time_cap_s=args.timeout_s)
    if args.mode == "plan_slam":
        log = simulator.run_plan_slam(world, world.plan, cfg, scenario)
    else:
        log = simulator.run_frontier_baseline(world, cfg, scenario)

    out = Path(args.out)
    out.write_text(log.to_jsonl())
    summary = log.summary_dict()
    Path(str(out) + ".summary.json").write_text(
        json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return EXIT_TIMEOUT if log.status == "timeout" else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "register": cmd_register,
        "evaluate": cmd_evaluate,
        "simulate": cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except (PlanRegError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
