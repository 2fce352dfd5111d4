"""Command-line front end: ``uthchern SCENARIO.json [flags]``.

Exit codes: 0 every check passed and every residual is zero, 1 some check or
residual failed, 2 the scenario could not be read or validated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import ScenarioError, parse_scenario, residual_lines, run

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def text_summary(report: dict) -> str:
    lines = [f"scenario {report['scenario'] or '(unnamed)'}: carrier {report['carrier']} "
             f"over ({', '.join(report['chart'])}), bundle rank ({report['bundle']['r0']},{report['bundle']['r1']})"]
    lines.append(f"carrier check: {'ok' if report['carrier_check']['passed'] else 'FAILED'}")
    for i, t in enumerate(report["tasks"], 1):
        what = t.get("connection") or t.get("aux") or f"{t.get('from')} -> {t.get('to')}"
        lines.append(f"task {i} {t['task']} [{what}]: {'ok' if t['passed'] else 'FAILED'}")
    bad = residual_lines(report)
    lines.extend("  " + b for b in bad)
    lines.append("PASSED" if report["passed"] else "FAILED")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uthchern", description="Run a Chern-character scenario file.")
    ap.add_argument("scenario", help="scenario JSON file, or - for stdin")
    ap.add_argument("--probe-degree", type=int, default=None, metavar="N",
                    help="maximal degree of the linearity probes (default 2, or the scenario's option)")
    ap.add_argument("--normalize", action="store_true", default=None, help="divide Str(k^p) by p!")
    ap.add_argument("--out", default=None, metavar="FILE", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.probe_degree is not None and args.probe_degree < 1:
        print("error: --probe-degree must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        text = sys.stdin.read() if args.scenario == "-" else Path(args.scenario).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    try:
        scen = parse_scenario(text)
    except ScenarioError as e:
        for d in e.diagnostics:
            print(f"{args.scenario}: {d}", file=sys.stderr)
        return EXIT_INVALID

    report = run(scen, probe_degree=args.probe_degree, normalize=args.normalize)
    out = dump_report(report) if args.format == "json" else text_summary(report)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    if not report["passed"]:
        for line in residual_lines(report):
            print(line, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
