"""Command-line entry point.

    simbridge run scenario.json [--duration S] [--log out.jsonl]
                                [--serve PORT] [--speed F] [--headless]
    simbridge export log.jsonl --csv OUTDIR

SIMBRIDGE_PORT sets the default --serve port.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .errors import DescriptionError, SimBridgeError
from .scenario import load_scenario_file, make_bridge

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def run_headless(scenario_path: str, duration: float | None,
                 log_path: str | None, speed: float | None = None) -> int:
    """Run without network; exit 0 iff the FSM reached the declared success
    state (when the scenario declares one) or the duration elapsed cleanly."""
    try:
        doc, _ = load_scenario_file(scenario_path)
    except (DescriptionError, OSError) as e:
        print(f"scenario validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    log_stream = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        try:
            bridge = make_bridge(doc, log_stream=log_stream, speed=speed)
        except (DescriptionError, SimBridgeError) as e:
            print(f"scenario validation failed: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            report = bridge.run(duration=duration, stop_on_terminal=True)
        except SimBridgeError as e:
            print(f"runtime failure: {e}", file=sys.stderr)
            return EXIT_RUNTIME
    finally:
        if log_stream is not None:
            log_stream.close()

    print(json.dumps(report.to_dict(), indent=2))
    if doc.get("success_state") is not None and not report.success:
        print(f"FSM ended in '{report.fsm_state}', expected "
              f"'{doc['success_state']}'", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def run_serve(scenario_path: str, port: int, speed: float | None,
              log_path: str | None) -> int:
    import uvicorn

    from .service import create_app
    try:
        doc, _ = load_scenario_file(scenario_path)
    except (DescriptionError, OSError) as e:
        print(f"scenario validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    panel = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(doc, speed=speed if speed is not None else 1.0,
                     panel_dir=str(panel) if panel.is_dir() else None)
    uvicorn.run(app, host="0.0.0.0", port=port)
    return EXIT_OK


def export_csv(log_path: str, out_dir: str) -> int:
    """One CSV per joint (t, q, qd, tau, q_ref, qd_ref) from a JSONL log."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    writers: dict[str, tuple] = {}
    try:
        with open(log_path, encoding="utf-8") as f:
            for line in f:
                rec = json.loads(line)
                if rec.get("type") != "tick":
                    continue
                for joint, vals in rec["joints"].items():
                    if joint not in writers:
                        fh = open(out / (joint.replace("/", "_") + ".csv"),
                                  "w", newline="", encoding="utf-8")
                        w = csv.writer(fh)
                        w.writerow(["t", "q", "qd", "tau", "q_ref", "qd_ref"])
                        writers[joint] = (fh, w)
                    writers[joint][1].writerow([
                        rec["t"], vals["q"], vals["qd"], vals["tau"],
                        vals["q_ref"], vals["qd_ref"],
                    ])
    except OSError as e:
        print(f"cannot read log: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    finally:
        for fh, _ in writers.values():
            fh.close()
    print(f"wrote {len(writers)} joint CSV files to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="simbridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("scenario")
    p_run.add_argument("--duration", type=float, default=None,
                       help="sim-seconds to run (headless)")
    p_run.add_argument("--log", default=None, help="JSONL trajectory log path")
    p_run.add_argument("--serve", type=int, nargs="?", metavar="PORT",
                       const=int(os.environ.get("SIMBRIDGE_PORT", "8700")),
                       default=None, help="serve telemetry/commands on PORT")
    p_run.add_argument("--speed", type=float, default=None,
                       help="real-time factor (0 = unlimited)")
    p_run.add_argument("--headless", action="store_true",
                       help="never open a network port")

    p_exp = sub.add_parser("export", help="export a JSONL log")
    p_exp.add_argument("log")
    p_exp.add_argument("--csv", required=True, metavar="OUTDIR",
                       help="write per-joint CSV files here")

    args = parser.parse_args(argv)
    if args.command == "run":
        if args.serve is not None and not args.headless:
            return run_serve(args.scenario, args.serve, args.speed, args.log)
        return run_headless(args.scenario, args.duration, args.log, args.speed)
    if args.command == "export":
        return export_csv(args.log, args.csv)
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
