"""Scenario files, run artifacts, and the batch runner.

A scenario is a single self-describing JSON document: domain, agents,
step size, tie-break, checks, output directory.  Each run writes a per-step
CSV (fixed column contract), a positions CSV for planar domains, a summary
JSON that round-trips field for field, and matplotlib figures (trajectory
SVG for planar domains plus a series SVG).  Artifact paths in the summary
are relative to the output directory so reruns are byte-identical.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domains import (
    ConvexPlanarRegion,
    EuclideanSpace,
    MetricTree,
    PlaneMinusDisks,
    SphereDomain,
    TieBreak,
    TreePoint,
)
from .errors import ConfigurationError, GeoPursuitError
from .pursuit import (
    AntipodalOscillator,
    CircleOrbiter,
    GeodesicRunner,
    RandomWalkPolicy,
    SpiralPolicy,
    Waypoints,
    run_discrete,
    run_dyadic,
)
from .verify import (
    capture_classifier,
    check_angle_sandwich,
    check_separation_monotone,
    check_tc_relation,
    fit_or_flat,
    limit_geodesic_diagnostic,
    sqrt_bound_report,
    CheckReport,
)

OUTPUT_DIR_ENV = "GEOPURSUIT_OUTPUT_DIR"

TRACE_COLUMNS = ["step", "t", "L", "alpha", "alpha_tilde", "beta", "Delta",
                 "tau_P", "tau_E", "c_P", "c_E", "r_P", "r_E"]

KNOWN_CHECKS = ("separation_monotone", "angle_sandwich", "tc_relation",
                "sqrt_bound", "limit_geodesic")


# ---------------------------------------------------------------------------
# Config


@dataclass
class ScenarioConfig:
    name: str
    domain: dict
    pursuer_start: object
    evader: dict
    step_size: float
    max_steps: int
    tie_break: str = TieBreak.UPPER
    seed: Optional[int] = None
    allow_long_start: bool = False
    record_stride: int = 1
    checks: list = field(default_factory=list)
    output_dir: Optional[str] = None
    dyadic: Optional[dict] = None

    @classmethod
    def from_dict(cls, d):
        def need(key):
            if key not in d:
                raise ConfigurationError("missing scenario field %r" % key)
            return d[key]

        cfg = cls(
            name=str(d.get("name", "scenario")),
            domain=need("domain"),
            pursuer_start=need("pursuer_start"),
            evader=need("evader"),
            step_size=float(need("step_size")),
            max_steps=int(d.get("max_steps", 10000)),
            tie_break=d.get("tie_break", TieBreak.UPPER),
            seed=d.get("seed"),
            allow_long_start=bool(d.get("allow_long_start", False)),
            record_stride=int(d.get("record_stride", 1)),
            checks=list(d.get("checks", [])),
            output_dir=d.get("output_dir"),
            dyadic=d.get("dyadic"),
        )
        if cfg.step_size <= 0:
            raise ConfigurationError("step_size: must be positive")
        if cfg.tie_break not in TieBreak.MODES:
            raise ConfigurationError("tie_break: unknown mode %r" % cfg.tie_break)
        for c in cfg.checks:
            if c not in KNOWN_CHECKS:
                raise ConfigurationError("checks: unknown check %r" % (c,))
        if cfg.evader.get("kind") == "random_walk" and cfg.seed is None:
            raise ConfigurationError("seed: required for stochastic policies")
        return cfg

    def to_dict(self):
        return {
            "name": self.name, "domain": self.domain,
            "pursuer_start": self.pursuer_start, "evader": self.evader,
            "step_size": self.step_size, "max_steps": self.max_steps,
            "tie_break": self.tie_break, "seed": self.seed,
            "allow_long_start": self.allow_long_start,
            "record_stride": self.record_stride, "checks": self.checks,
            "output_dir": self.output_dir, "dyadic": self.dyadic,
        }


def build_domain(desc):
    kind = desc.get("kind")
    if kind == "euclidean":
        return EuclideanSpace(int(desc.get("dim", 2)))
    if kind == "convex_region":
        if "polygon" in desc:
            return ConvexPlanarRegion(polygon=desc["polygon"])
        return ConvexPlanarRegion(disk_radius=float(desc["disk_radius"]),
                                  center=desc.get("center", (0.0, 0.0)))
    if kind == "sphere":
        return SphereDomain(float(desc.get("radius", 1.0)))
    if kind == "plane_minus_disks":
        disks = [(d["center"], float(d["radius"])) for d in desc["disks"]]
        return PlaneMinusDisks(disks, min_radius_check=desc.get(
            "min_radius_check", True))
    if kind == "metric_tree":
        return MetricTree([tuple(e) for e in desc["edges"]])
    raise ConfigurationError("domain.kind: unknown kind %r" % (kind,))


def parse_point(domain, desc):
    if isinstance(domain, MetricTree):
        if isinstance(desc, dict):
            if "vertex" in desc:
                return domain.vertex_point(desc["vertex"])
            return TreePoint(int(desc["edge"]), float(desc["offset"]))
        return TreePoint(int(desc[0]), float(desc[1]))
    return domain.validate_point(desc)


def build_policy(domain, desc):
    kind = desc.get("kind")
    if kind == "geodesic_runner":
        start = parse_point(domain, desc["start"])
        return GeodesicRunner(start, direction=desc.get("direction"),
                              target=None if "target" not in desc
                              else parse_point(domain, desc["target"]))
    if kind == "waypoints":
        return Waypoints(parse_point(domain, desc["start"]),
                         [parse_point(domain, p) for p in desc["points"]])
    if kind == "spiral":
        return SpiralPolicy(float(desc.get("u0", 1.0)))
    if kind == "antipodal_oscillator":
        return AntipodalOscillator(int(desc.get("disk", 0)))
    if kind == "circle_orbiter":
        return CircleOrbiter(int(desc.get("disk", 0)),
                             float(desc.get("arc_ahead", 1.0)),
                             int(desc.get("orientation", 1)))
    if kind == "random_walk":
        return RandomWalkPolicy(parse_point(domain, desc["start"]))
    raise ConfigurationError("evader.kind: unknown policy %r" % (kind,))


# ---------------------------------------------------------------------------
# Trace serialization


def write_trace_csv(trace, path):
    """Per-step table with exactly the contract columns, repr-precision floats."""
    cols = {
        "step": trace.steps, "t": trace.t, "L": trace.L,
        "alpha": trace.alpha, "alpha_tilde": trace.alpha_tilde,
        "beta": trace.beta, "Delta": trace.Delta,
        "tau_P": trace.tau_P, "tau_E": trace.tau_E,
        "c_P": trace.c_P, "c_E": trace.c_E, "r_P": trace.r_P, "r_E": trace.r_E,
    }
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for i in range(len(trace.steps)):
            row = []
            for name in TRACE_COLUMNS:
                v = cols[name][i]
                row.append(int(v) if name == "step" else repr(float(v)))
            writer.writerow(row)


@dataclass
class CsvTrace:
    """Trace reconstructed from a per-step CSV; enough for the checkers."""

    steps: np.ndarray
    t: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    alpha_tilde: np.ndarray
    beta: np.ndarray
    Delta: np.ndarray
    tau_P: np.ndarray
    tau_E: np.ndarray
    c_P: np.ndarray
    c_E: np.ndarray
    r_P: np.ndarray
    r_E: np.ndarray
    step_size: float
    stride: int
    curvature_bound: Optional[float] = None
    capture_step: Optional[int] = None
    B_min: Optional[float] = None
    worst_monotone: Optional[float] = None

    @property
    def L0(self):
        return float(self.L[0])

    @property
    def L_final(self):
        return float(self.L[-1])

    @property
    def total_steps(self):
        return int(self.steps[-1])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_COLUMNS:
            raise ConfigurationError(
                "trace CSV columns %r do not match the contract" % (header,))
        rows = [[float(x) for x in row] for row in reader]
    if not rows:
        raise ConfigurationError("trace CSV has no rows")
    arr = np.asarray(rows, dtype=float)
    data = {name: arr[:, j] for j, name in enumerate(TRACE_COLUMNS)}
    steps = data["step"].astype(int)
    if len(steps) >= 2 and steps[1] > steps[0]:
        step_size = float((data["t"][1] - data["t"][0]) / (steps[1] - steps[0]))
        stride = int(steps[1] - steps[0])
    else:
        step_size = float(data["t"][-1] / steps[-1]) if steps[-1] else 1.0
        stride = 1
    return CsvTrace(
        steps=steps, t=data["t"], L=data["L"], alpha=data["alpha"],
        alpha_tilde=data["alpha_tilde"], beta=data["beta"], Delta=data["Delta"],
        tau_P=data["tau_P"], tau_E=data["tau_E"], c_P=data["c_P"],
        c_E=data["c_E"], r_P=data["r_P"], r_E=data["r_E"],
        step_size=step_size, stride=stride)


def write_positions_csv(trace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "P_x", "P_y", "E_x", "E_y"])
        for i, step in enumerate(trace.steps):
            P, E = trace.P_points[i], trace.E_points[i]
            writer.writerow([int(step), repr(float(P[0])), repr(float(P[1])),
                             repr(float(E[0])), repr(float(E[1]))])


# ---------------------------------------------------------------------------
# Summary


def _fit_to_list(fit):
    return None if fit is None else [fit.exponent, fit.half_width]


@dataclass
class RunSummary:
    name: str
    outcome: str
    capture_step: Optional[int]
    L0: float
    LN: float
    C: Optional[float]
    B: Optional[float]
    fits: dict
    checks: list
    artifacts: dict
    domain: dict
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "name": self.name, "outcome": self.outcome,
            "capture_step": self.capture_step, "L0": self.L0, "LN": self.LN,
            "C": self.C, "B": self.B, "fits": self.fits,
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": self.artifacts, "domain": self.domain,
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"], outcome=d["outcome"],
            capture_step=d["capture_step"], L0=d["L0"], LN=d["LN"],
            C=d["C"], B=d["B"], fits=d["fits"],
            checks=[CheckReport.from_dict(c) for c in d["checks"]],
            artifacts=d["artifacts"], domain=d["domain"],
            warnings=list(d.get("warnings", [])),
        )

    @property
    def all_checks_pass(self):
        return all(c.passed for c in self.checks)


def _run_checks(trace, names):
    reports = []
    for name in names:
        try:
            if name == "separation_monotone":
                reports.append(check_separation_monotone(trace))
            elif name == "angle_sandwich":
                reports.append(check_angle_sandwich(trace))
            elif name == "tc_relation":
                reports.append(check_tc_relation(trace))
            elif name == "sqrt_bound":
                reports.append(sqrt_bound_report(trace).to_check())
            elif name == "limit_geodesic":
                diag = limit_geodesic_diagnostic(trace)
                finals = [v[-1] for v in diag.values if v]
                worst = max(finals) if finals else 0.0
                reports.append(CheckReport(
                    "limit_geodesic", bool(diag.converged), worst, None, 1e-3,
                    context={"applicable": diag.applicable}))
        except GeoPursuitError as exc:
            reports.append(CheckReport(name, False, math.inf, None, 0.0,
                                       context={"refused": str(exc)}))
    return reports


def run_scenario(config, output_dir=None):
    """Execute one scenario and write its artifacts; returns the RunSummary."""
    if isinstance(config, (str, os.PathLike)):
        with open(config) as fh:
            config = json.load(fh)
    if isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    out = output_dir or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir or "."
    os.makedirs(out, exist_ok=True)
    domain = build_domain(config.domain)
    policy = build_policy(domain, config.evader)
    pursuer_start = parse_point(domain, config.pursuer_start)
    tb = TieBreak(config.tie_break)
    trace = run_discrete(domain, pursuer_start, policy, config.step_size,
                         config.max_steps, tie_break=tb, seed=config.seed,
                         allow_long_start=config.allow_long_start,
                         record_stride=config.record_stride)

    stem = config.name
    artifacts = {}
    csv_path = os.path.join(out, stem + ".trace.csv")
    write_trace_csv(trace, csv_path)
    artifacts["trace_csv"] = stem + ".trace.csv"
    if domain.planar:
        pos_path = os.path.join(out, stem + ".positions.csv")
        write_positions_csv(trace, pos_path)
        artifacts["positions_csv"] = stem + ".positions.csv"

    from . import plotting
    if domain.planar:
        plotting.emit_plot(trace, os.path.join(out, stem + ".trajectory.svg"))
        artifacts["trajectory_svg"] = stem + ".trajectory.svg"
    plotting.emit_series_plot(trace, os.path.join(out, stem + ".series.svg"))
    artifacts["series_svg"] = stem + ".series.svg"

    if config.dyadic:
        track = policy.curve(domain)
        if track is None:
            raise ConfigurationError(
                "dyadic: evader policy %r has no continuous track" % policy.name)
        dy = run_dyadic(domain, pursuer_start, track,
                        int(config.dyadic["m_min"]), int(config.dyadic["m_max"]),
                        float(config.dyadic.get("horizon",
                                                config.max_steps * config.step_size)),
                        allow_long_start=config.allow_long_start)
        with open(os.path.join(out, stem + ".dyadic.json"), "w") as fh:
            json.dump({"horizon": dy.horizon, "rounded": dy.rounded,
                       "m_values": dy.m_values, "sup_gaps": dy.sup_gaps,
                       "min_separations": dy.min_separations,
                       "captures": dy.captures}, fh, indent=2)
        artifacts["dyadic_json"] = stem + ".dyadic.json"

    reports = _run_checks(trace, config.checks)
    outcome_obj = None
    warnings = []
    try:
        outcome_obj = capture_classifier(trace)
        outcome = outcome_obj.kind
    except GeoPursuitError as exc:
        outcome = "capture" if trace.captured else "escape"
        warnings.append("classifier: %s" % exc)
    C = B = None
    if domain.curvature_bound > 0 and not trace.captured:
        try:
            rep = sqrt_bound_report(trace)
            C, B = rep.C, rep.B
        except GeoPursuitError as exc:
            warnings.append("sqrt_bound: %s" % exc)
    fits = {
        "tau_P": _fit_to_list(fit_or_flat(trace.t, trace.tau_P)),
        "tau_E": _fit_to_list(fit_or_flat(trace.t, trace.tau_E)),
        "c_P": _fit_to_list(fit_or_flat(trace.t, trace.c_P)),
        "c_E": _fit_to_list(fit_or_flat(trace.t, trace.c_E)),
    }
    summary = RunSummary(
        name=config.name, outcome=outcome, capture_step=trace.capture_step,
        L0=trace.L0, LN=trace.L_final, C=C, B=B, fits=fits, checks=reports,
        artifacts=artifacts, domain=domain.describe(), warnings=warnings)
    with open(os.path.join(out, stem + ".summary.json"), "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2, allow_nan=False)
    return summary


def run_batch(sweep, output_dir=None):
    """Run a list of scenarios (or a dyadic sweep); partial failures are
    recorded per run and the batch continues.  Returns (summaries, table)."""
    if isinstance(sweep, (str, os.PathLike)):
        base = os.path.dirname(os.fspath(sweep))
        with open(sweep) as fh:
            sweep = json.load(fh)
    else:
        base = "."
    if isinstance(sweep, dict) and "dyadic" in sweep:
        return _run_dyadic_sweep(sweep["dyadic"], output_dir)
    entries = sweep["scenarios"] if isinstance(sweep, dict) else list(sweep)
    if not entries:
        raise ConfigurationError("batch: empty scenario list")
    results = []
    for entry in entries:
        if isinstance(entry, str):
            path = entry if os.path.isabs(entry) else os.path.join(base, entry)
            name = os.path.splitext(os.path.basename(path))[0]
            target = path
        else:
            name = entry.get("name", "scenario")
            target = entry
        try:
            results.append(("ok", run_scenario(target, output_dir=output_dir)))
        except GeoPursuitError as exc:
            results.append(("error: %s" % exc, None))
    table = []
    for status, summary in results:
        if summary is None:
            table.append({"name": "?", "status": status})
        else:
            table.append({
                "name": summary.name, "status": status,
                "outcome": summary.outcome,
                "L0": summary.L0, "LN": summary.LN,
                "checks_pass": summary.all_checks_pass,
            })
    out = output_dir or os.environ.get(OUTPUT_DIR_ENV)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "batch_summary.csv"), "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["name", "status", "outcome", "L0", "LN",
                                "checks_pass"])
            writer.writeheader()
            for row in table:
                writer.writerow(row)
    return results, table


def _run_dyadic_sweep(desc, output_dir=None):
    domain = build_domain(desc["domain"])
    policy = build_policy(domain, desc["evader"])
    track = policy.curve(domain)
    if track is None:
        raise ConfigurationError("dyadic: evader policy has no continuous track")
    report = run_dyadic(
        domain, parse_point(domain, desc["pursuer_start"]), track,
        int(desc["m_min"]), int(desc["m_max"]), float(desc["horizon"]),
        allow_long_start=bool(desc.get("allow_long_start", False)))
    table = [{"m": m, "min_separation": s, "capture": c}
             for m, s, c in zip(report.m_values, report.min_separations,
                                report.captures)]
    for k, gap in enumerate(report.sup_gaps):
        table[k + 1]["sup_gap_to_previous"] = gap
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        with open(os.path.join(output_dir, "dyadic_sweep.json"), "w") as fh:
            json.dump({"horizon": report.horizon, "rounded": report.rounded,
                       "rows": table}, fh, indent=2)
    return report, table
