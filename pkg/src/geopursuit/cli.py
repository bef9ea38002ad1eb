"""Command-line runner.

Verbs:
  run <scenario.json>        execute one scenario, write artifacts
  batch <sweep.json>         run many scenarios or a dyadic sweep
  verify <trace.csv>         re-run trace checks on a written CSV
  plot <trace.csv> <out.svg> rebuild the trajectory figure from artifacts

Exit codes: 0 all requested checks pass, 1 a check fails, 2 configuration or
engine error.  GEOPURSUIT_OUTPUT_DIR overrides every output directory.
"""

import argparse
import json
import os
import sys

from .errors import GeoPursuitError
from .scenario import (
    OUTPUT_DIR_ENV,
    build_domain,
    read_trace_csv,
    run_batch,
    run_scenario,
)
from .verify import (
    check_angle_sandwich,
    check_separation_monotone,
    check_tc_relation,
    sqrt_bound_report,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _print_check(report):
    state = "PASS" if report.passed else "FAIL"
    print("  [%s] %-22s worst=%.3e tol=%.1e" % (
        state, report.name, report.worst, report.tolerance))


def _cmd_run(args):
    summary = run_scenario(args.scenario, output_dir=args.output_dir)
    print("scenario %s: %s (L0=%.6g, LN=%.6g)" % (
        summary.name, summary.outcome, summary.L0, summary.LN))
    for rep in summary.checks:
        _print_check(rep)
    for w in summary.warnings:
        print("  note: %s" % w)
    return EXIT_OK if summary.all_checks_pass else EXIT_CHECK_FAILED


def _cmd_batch(args):
    results, table = run_batch(args.sweep, output_dir=args.output_dir)
    failed = False
    for row in table:
        print(json.dumps(row))
        if row.get("status", "").startswith("error"):
            failed = True
        if row.get("checks_pass") is False:
            failed = True
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _cmd_verify(args):
    trace = read_trace_csv(args.trace)
    k = args.curvature_bound
    if k is None:
        sidecar = args.trace.replace(".trace.csv", ".summary.json")
        if os.path.exists(sidecar):
            with open(sidecar) as fh:
                dom = json.load(fh).get("domain", {})
            k = {"euclidean": 0.0, "convex_region": 0.0, "metric_tree": 0.0,
                 "plane_minus_disks": 1.0}.get(dom.get("kind"))
            if dom.get("kind") == "sphere":
                k = 1.0 / float(dom["radius"]) ** 2
    trace.curvature_bound = k
    reports = [check_separation_monotone(trace), check_angle_sandwich(trace)]
    if k is not None and k == 0.0:
        reports.append(check_tc_relation(trace))
    if k is not None and k > 0 and trace.L_final > trace.step_size:
        try:
            reports.append(sqrt_bound_report(trace).to_check())
        except GeoPursuitError as exc:
            print("  note: sqrt_bound not applicable: %s" % exc)
    ok = True
    for rep in reports:
        _print_check(rep)
        ok = ok and rep.passed
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_plot(args):
    from . import plotting

    positions = args.trace.replace(".trace.csv", ".positions.csv")
    sidecar = args.trace.replace(".trace.csv", ".summary.json")
    if not os.path.exists(sidecar):
        raise GeoPursuitError("summary sidecar %s not found" % sidecar)
    with open(sidecar) as fh:
        domain = build_domain(json.load(fh)["domain"])
    if not os.path.exists(positions):
        raise GeoPursuitError(
            "positions sidecar %s not found (non-planar domains have none)"
            % positions)
    plotting.plot_from_artifacts(positions, domain, args.out)
    print("wrote %s" % args.out)
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="geopursuit",
        description="geodesic-domain pursuit simulator and verifier")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run a sweep file")
    p_batch.add_argument("sweep")
    p_batch.add_argument("--output-dir", default=None)
    p_batch.set_defaults(func=_cmd_batch)

    p_ver = sub.add_parser("verify", help="re-check a written trace CSV")
    p_ver.add_argument("trace")
    p_ver.add_argument("--curvature-bound", type=float, default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_plot = sub.add_parser("plot", help="trajectory figure from artifacts")
    p_plot.add_argument("trace")
    p_plot.add_argument("out")
    p_plot.set_defaults(func=_cmd_plot)

    args = parser.parse_args(argv)
    if getattr(args, "output_dir", None) is None and os.environ.get(OUTPUT_DIR_ENV):
        if hasattr(args, "output_dir"):
            args.output_dir = os.environ[OUTPUT_DIR_ENV]
    try:
        return args.func(args)
    except (GeoPursuitError, FileNotFoundError, json.JSONDecodeError,
            KeyError, TypeError, ValueError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
