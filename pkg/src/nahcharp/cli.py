"""Command line: ``verify``, ``run`` and ``examples``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input
(unreadable or invalid scenario, unknown suite, failed preconditions).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AlgebraError
from .scenarios import CHECKS, REGISTRY, list_examples, load_scenario, parse_scenario, registry_json
from .suites import SUITES, run_scenario, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mark(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _first_failure(rep) -> str:
    """Dig out the first located failure in a check report, if any."""
    if isinstance(rep, dict):
        if rep.get("result") is False:
            for key in ("location", "first_failure"):
                if rep.get(key) is not None:
                    return f"{key}={rep[key]}"
        for k, v in rep.items():
            hit = _first_failure(v)
            if hit:
                return f"{k}: {hit}"
    elif isinstance(rep, list):
        for i, v in enumerate(rep):
            hit = _first_failure(v)
            if hit:
                return f"[{i}] {hit}"
    return ""


def format_scenario_text(rep: dict) -> str:
    lines = [f"scenario {rep['scenario']} (p = {rep['prime']})"]
    if rep["citations"]:
        lines.append("  exercises: " + ", ".join(rep["citations"]))
    for name, res in rep["checks"].items():
        extra = "" if res["result"] else _first_failure(res)
        lines.append(f"  {name:<20} {_mark(res['result'])}" + (f"  {extra}" if extra else ""))
    lines.append(f"overall {_mark(rep['result'])}")
    return "\n".join(lines) + "\n"


def format_suite_text(rep: dict) -> str:
    lines = [f"{'suite':<20} status"]
    for name, res in rep["suites"].items():
        lines.append(f"{name:<20} {_mark(res['result'])}")
    lines.append(f"{'overall':<20} {_mark(rep['result'])}")
    return "\n".join(lines) + "\n"


def _dump(rep: dict) -> str:
    return json.dumps(rep, indent=2) + "\n"


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, prime=args.prime, seed=args.seed, degree_cap=args.degree_cap)
    _emit(_dump(rep) if args.report == "json" else format_suite_text(rep), args.out)
    return EXIT_PASS if rep["result"] else EXIT_FAIL


def cmd_run(args) -> int:
    target = args.scenario
    if target in REGISTRY and not os.path.exists(target):
        sc = parse_scenario(registry_json(target, args.prime or 5))
    else:
        sc = load_scenario(target, args.prime)
    rep = run_scenario(sc, args.check or None, args.degree_cap)
    _emit(_dump(rep) if args.report == "json" else format_scenario_text(rep), args.out)
    return EXIT_PASS if rep["result"] else EXIT_FAIL


def cmd_examples(args) -> int:
    if args.action == "show":
        if not args.name:
            raise AlgebraError("examples show needs a name", location="argv")
        _emit(_dump(registry_json(args.name, args.prime or 5)), args.out)
        return EXIT_PASS
    items = list_examples()
    if args.report == "json":
        _emit(_dump({"examples": items}), args.out)
    else:
        lines = []
        for it in items:
            lines.append(f"{it['name']}: {it['description']}")
            for c in it["citations"]:
                lines.append(f"    - {c['key']}: {c['statement']}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=None, help="override the prime")
    common.add_argument("--seed", type=int, default=42, help="seed for randomized suites")
    common.add_argument("--report", choices=("json", "text"), default="text")
    common.add_argument("--out", default=None, help="write the report to FILE")
    common.add_argument("--degree-cap", type=int, default=None, help="degree cap of the isomorphism search (default 2p)")

    ap = argparse.ArgumentParser(prog="nahcharp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("--suite", required=True, help=f"one of: all, {', '.join(SUITES)}")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", parents=[common], help="run a scenario file or registry example")
    r.add_argument("scenario", help="path to scenario JSON or a registry name")
    r.add_argument("--check", action="append", choices=CHECKS, help="restrict to these checks (repeatable)")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("examples", parents=[common], help="list or print registry examples")
    e.add_argument("action", choices=("list", "show"))
    e.add_argument("name", nargs="?")
    e.set_defaults(func=cmd_examples)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AlgebraError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
