"""Command-line entry point.

Subcommands: simulate, analyze, sweep, policy, compare. Scenarios come
from a ``key = value`` config file, a named preset (fig4..fig9), or both
(config overrides preset). Errors exit nonzero with a machine-readable
JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (PRESETS, compare, rerun_from_manifest, run_scenario,
                          scenario_from_config, scenario_from_preset)
from .params import ParamError, parse_config


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--preset", choices=sorted(PRESETS),
                     help="named scenario preset")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--workers", type=int, default=None,
                     help="process pool size (0 = cpu count)")
    sub.add_argument("--slots", type=int, default=None)
    sub.add_argument("--replications", type=int, default=None)
    sub.add_argument("--name", default=None, help="artifact basename")


def _build_scenario(args):
    overrides = {}
    for key in ("out", "seed", "workers", "slots", "replications", "name"):
        val = getattr(args, key)
        if val is not None:
            overrides["out_dir" if key == "out" else key] = val
    cfg = parse_config(args.config) if args.config else {}
    if args.preset:
        cfg.setdefault("preset", args.preset)
    # presets and explicit config keys own the mode; otherwise the
    # subcommand decides it
    explicit_mode = "mode" in cfg or "preset" in cfg
    if "preset" not in cfg:
        overrides.setdefault("name", args.mode)
    scenario = scenario_from_config(cfg, **overrides)
    if not explicit_mode:
        scenario.mode = args.mode
    return scenario


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="aoinet",
        description="AoI simulation and analysis for random-access networks")
    subs = parser.add_subparsers(dest="command", required=True)

    for mode, doc in (("simulate", "run simulations over the parameter grid"),
                      ("analyze", "solve the analytical pipeline over the grid"),
                      ("sweep", "simulate and analyze side by side"),
                      ("policy", "compare channel-access policies")):
        sub = subs.add_parser(mode, help=doc)
        _add_common(sub)
        sub.set_defaults(mode=mode)

    run_m = subs.add_parser("rerun", help="re-execute a scenario from its manifest")
    run_m.add_argument("manifest")
    run_m.add_argument("--out", default=None)

    cmp_p = subs.add_parser("compare", help="sim-vs-analysis deviation report")
    cmp_p.add_argument("--sim", required=True, help="summary CSV with sim columns")
    cmp_p.add_argument("--analysis", required=True,
                       help="summary CSV with analysis columns")
    cmp_p.add_argument("--rel-tol", type=float, default=0.05)
    cmp_p.add_argument("--outage-tol", type=float, default=0.05)
    cmp_p.add_argument("--report", default=None, help="report CSV path")

    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            result = compare(args.sim, args.analysis, rel_tol=args.rel_tol,
                             abs_tol_outage=args.outage_tol,
                             out_path=args.report)
            n_fail = sum(1 for row in result["rows"]
                         if not row.get("pass_avg_aoi", 1)
                         or not row.get("pass_peak_outage", 1))
            print(json.dumps({"passed": result["passed"],
                              "points": len(result["rows"]),
                              "failed_points": n_fail}))
            return 0 if result["passed"] else 1
        if args.command == "rerun":
            artifacts = rerun_from_manifest(args.manifest, out_dir=args.out)
        else:
            artifacts = run_scenario(_build_scenario(args))
        print(json.dumps(artifacts))
        return 0
    except (ParamError, FileNotFoundError, KeyError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
