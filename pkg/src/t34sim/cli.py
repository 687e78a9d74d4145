"""Command line front end.

Exit codes: 0 for a clean result, 1 when any requirement violation was
found, 2 for usage, file, or parse problems.
"""

import argparse
import sys
from pathlib import Path

from .safety import MUTATIONS, model_check
from .service import create_app
from .sim import (
    ScenarioError,
    load_scenario,
    parse_trace,
    render_log,
    render_trace,
    render_violations,
    run_scenario,
    scenario_from_trace,
)


def _add_mutate(parser):
    parser.add_argument(
        "--mutate", action="append", default=[], choices=sorted(MUTATIONS),
        metavar="NAME", help="inject a named fault (repeatable)")


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"bad scenario: {exc}", file=sys.stderr)
        return 2
    report = run_scenario(scenario, mutations=tuple(args.mutate))
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "trace.jsonl").write_text(render_trace(report), encoding="utf-8")
        (outdir / "log.txt").write_text(render_log(report.log, report.epoch),
                                        encoding="utf-8")
        (outdir / "violations.txt").write_text(
            render_violations(report.violations), encoding="utf-8")
    final = report.final.current.name
    print(f"final state: {final}")
    print(f"steps: {len(report.trace)}, log lines: {len(report.log)}")
    print(f"violations: {len(report.violations)}")
    if report.violations:
        print(render_violations(report.violations), end="")
        return 1
    return 0


def _cmd_check(args) -> int:
    try:
        report = model_check(max_depth=args.max_depth,
                             mutations=tuple(args.mutate),
                             workers=args.workers)
    except ValueError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    behaviours = ", ".join(sorted(b.name for b in report.behaviours))
    print(f"explored {report.explored} states to depth {report.depth}")
    print(f"behaviours reached ({len(report.behaviours)}): {behaviours}")
    print(f"violations: {len(report.violations)}")
    if report.violations:
        print(render_violations(report.violations), end="")
        return 1
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    app = create_app(paced=args.paced)
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    return 0


def _cmd_replay(args) -> int:
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
        header, steps = parse_trace(text, name=str(args.trace))
        scenario = scenario_from_trace(header, steps, name=str(args.trace))
        mutations = tuple(header.get("mutations", ()))
        report = run_scenario(scenario, mutations=mutations)
    except OSError as exc:
        print(f"cannot read trace: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, ValueError) as exc:
        print(f"bad trace: {exc}", file=sys.stderr)
        return 2
    fresh = render_trace(report)
    if fresh == text:
        print(f"replay OK: {len(report.trace)} steps reproduced")
        return 0
    old_lines = text.splitlines()
    new_lines = fresh.splitlines()
    for index, (old, new) in enumerate(zip(old_lines, new_lines), start=1):
        if old != new:
            print(f"replay diverged at line {index}:")
            print(f"  file:   {old}")
            print(f"  replay: {new}")
            return 1
    print(f"replay diverged: file has {len(old_lines)} lines, "
          f"replay produced {len(new_lines)}")
    return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="t34sim",
        description="Syringe-driver behaviour simulator and verifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file")
    run_p.add_argument("scenario", help="scenario JSON file")
    run_p.add_argument("-o", "--out", help="directory for trace, log, and report")
    _add_mutate(run_p)
    run_p.set_defaults(func=_cmd_run)

    check_p = sub.add_parser("check", help="exhaustively check the state machine")
    check_p.add_argument("--max-depth", type=int, default=None,
                         help="bound the search depth (default: unbounded)")
    check_p.add_argument("--workers", type=int, default=1,
                         help="expansion workers (result is identical for any count)")
    _add_mutate(check_p)
    check_p.set_defaults(func=_cmd_check)

    serve_p = sub.add_parser("serve", help="serve the event API")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--paced", action="store_true",
                         help="advance one virtual second per real second")
    serve_p.set_defaults(func=_cmd_serve)

    replay_p = sub.add_parser("replay", help="re-run a trace and compare bytes")
    replay_p.add_argument("trace", help="trace JSONL file")
    replay_p.set_defaults(func=_cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
