"""Command-line entry point: ``qdice run | demo | validate``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .demos import DEMOS
from .scenario import (
    EXIT_OK,
    EXIT_USAGE,
    RunResult,
    ScenarioError,
    load_scenario,
    resolve_path,
    run_scenario,
    validate_scenario,
)


def _common(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default,
                        help="override the seed of every sample stage")
    parser.add_argument("--tol", type=float, default=default,
                        help="override the numeric tolerance for table checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdice", description="Quantum coins, dice and decisions.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file (or a bundled scenario name)")
    run.add_argument("file")
    run.add_argument("--out", help="write machine-readable JSON results here")
    run.add_argument("--csv", action="store_true", help="print flat CSV tables instead of text")
    run.add_argument("--dump-states", action="store_true", help="include the state after every stage")
    _common(run, suppress=True)

    demo = sub.add_parser("demo", help="print a canned demonstration")
    demo.add_argument("name")
    _common(demo, suppress=True)

    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("file")
    _common(val, suppress=True)
    return parser


def render_text(result: RunResult) -> str:
    lines = [f"scenario: {result.scenario}"]
    for st in result.stages:
        head = f"[{st['index']}] {st['op']}"
        if st.get("name"):
            head += f" - {st['name']}"
        lines += ["", head]
        op = st["op"]
        if op == "measure":
            w = max(len(o) for o in st["outcomes"])
            lines += [f"  {o.rjust(w)}  {p:.6f}" for o, p in zip(st["outcomes"], st["probabilities"])]
        elif op == "condition":
            lines.append(f"  observed {st['outcome']!s} on {st['label']} (probability {st['probability']:.6f})")
        elif op == "evolve":
            lines.append(f"  duration {st['duration']:g}" + (f" on {st['label']}" if st["label"] else ""))
        elif op == "wait":
            lines.append(f"  tau {st['tau']:g}, t_rel {st['t_rel']:g}, perturbation weight {st['weight']:.6g}")
        elif op == "joint":
            la, lb = st["labels"]
            lines.append(f"  joint p({la},{lb}):")
            lines += ["    " + "  ".join(f"{x:.6f}" for x in row) for row in st["joint"]]
            lines.append(f"  p({la}) = " + ", ".join(f"{x:.6f}" for x in st["marginal_a"]))
            lines.append(f"  p({lb}) = " + ", ".join(f"{x:.6f}" for x in st["marginal_b"]))
        elif op == "qdt":
            cols = ["f", "q", "p"] + (["p_exp", "|dev|"] if "experimental" in st else [])
            data = [st["utility_fraction"], st["attraction"], st["probabilities"]]
            if "experimental" in st:
                data += [st["experimental"], st["deviation"]]
            lines.append("  n  " + "  ".join(c.rjust(9) for c in cols))
            for n, row in enumerate(zip(*data)):
                lines.append(f"  {n}  " + "  ".join(f"{x:9.6f}" for x in row))
        elif op == "sample":
            lines.append(f"  {st['trials']} trials, seed {st['seed']}, max |freq - p| = "
                         f"{st['max_abs_deviation']:.6f}, within 3 sigma: {st['all_within_bounds']}")
            lines.append("  counts: " + ", ".join(str(c) for c in st["counts"]))
    return "\n".join(lines) + "\n"


def render_csv(result: RunResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "op", "table", "row", "col", "value"])
    for row in result.tables():
        w.writerow(row)
    return buf.getvalue()


def _fail(err: ScenarioError) -> int:
    print(f"qdice: error: {err}", file=sys.stderr)
    print(json.dumps(err.to_dict(), sort_keys=True), file=sys.stderr)
    return err.exit_code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE

    if args.command == "demo":
        fn = DEMOS.get(args.name)
        if fn is None:
            print(f"qdice: unknown demo {args.name!r}; available: {', '.join(sorted(DEMOS))}",
                  file=sys.stderr)
            return EXIT_USAGE
        print(fn().render())
        return EXIT_OK

    try:
        path = resolve_path(args.file)
        if args.command == "validate":
            sc = validate_scenario(path)
            print(json.dumps({"valid": True, "scenario": sc.name, "stages": len(sc.stages)}))
            return EXIT_OK
        sc = load_scenario(path)
        result = run_scenario(sc, seed=args.seed, tol=args.tol, dump_states=args.dump_states)
    except ScenarioError as e:
        if args.command == "validate":
            print(json.dumps({"valid": False, **e.to_dict()}, sort_keys=True))
        return _fail(e)

    if args.out:
        with open(args.out, "w") as fh:
            fh.write(result.to_json())
    sys.stdout.write(render_csv(result) if args.csv else render_text(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
