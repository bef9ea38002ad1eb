"""Trace checkers and bound monitors.

Each checker is a pure function over an immutable trace (or domain) and
returns a CheckReport whose pass flag is exactly "worst violation within the
stated tolerance".  Negative controls (corrupted traces, invalid domains)
are expected to fail these checks and are exercised by the test suite.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from .curves import GrowthFit, comparison_angle, fit_growth_exponent
from .domains import TieBreak
from .errors import (
    HypothesisError,
    IncompleteTraceError,
    InsufficientDataError,
    RangeError,
    UnsupportedDomainError,
)
from .tolerances import ANGLE_TOL, GEOM_TOL


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst: float
    index: Optional[int]
    tolerance: float
    context: dict = field(default_factory=dict)

    def to_dict(self):
        # refused checks carry an infinite violation; JSON gets null instead
        worst = float(self.worst)
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst": worst if math.isfinite(worst) else None,
            "index": self.index,
            "tolerance": float(self.tolerance),
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, d):
        worst = d["worst"]
        return cls(name=d["name"], passed=d["passed"],
                   worst=math.inf if worst is None else worst,
                   index=d["index"], tolerance=d["tolerance"],
                   context=d.get("context", {}))


def check_separation_monotone(trace, tol=GEOM_TOL):
    """Worst increase of the separation series; engine-tracked per-step worst
    is folded in when available."""
    L = np.asarray(trace.L, dtype=float)
    if len(L) < 1:
        raise IncompleteTraceError("empty trace")
    worst = -math.inf
    index = None
    if len(L) >= 2:
        diffs = L[1:] - L[:-1]
        j = int(np.argmax(diffs))
        worst = float(diffs[j])
        index = int(trace.steps[j + 1])
    if getattr(trace, "worst_monotone", None) is not None:
        if trace.worst_monotone > worst:
            worst = float(trace.worst_monotone)
    if worst == -math.inf:
        worst = 0.0
    return CheckReport("separation_monotone", worst <= tol, worst, index, tol)


def check_angle_sandwich(trace, tol=ANGLE_TOL):
    """Worst violation of (pi - beta) <= alpha <= alpha_tilde, skipping steps
    where a model angle does not exist."""
    alpha = np.asarray(trace.alpha, dtype=float)
    beta = np.asarray(trace.beta, dtype=float)
    atil = np.asarray(trace.alpha_tilde, dtype=float)
    if not len(alpha) or not np.any(np.isfinite(alpha)):
        raise IncompleteTraceError("trace has no populated angle columns")
    worst = -math.inf
    index = None
    for j in range(len(alpha)):
        if math.isfinite(alpha[j]) and math.isfinite(beta[j]):
            v = (math.pi - beta[j]) - alpha[j]
            if v > worst:
                worst, index = v, int(trace.steps[j])
        if math.isfinite(alpha[j]) and math.isfinite(atil[j]):
            v = alpha[j] - atil[j]
            if v > worst:
                worst, index = v, int(trace.steps[j])
    return CheckReport("angle_sandwich", worst <= tol, worst, index, tol)


def check_tc_relation(trace, tol=ANGLE_TOL):
    """Pursuer total rotation against evader total rotation plus pi.

    Proved only for flat curvature bounds; calling on a positively curved
    trace is an error.  Full-resolution traces use the sharp offset form
    tau_P((n+1)D) - tau_E(nD); decimated traces fall back to the implied
    same-row form.
    """
    if trace.curvature_bound is None:
        raise UnsupportedDomainError("trace does not carry a curvature bound")
    if trace.curvature_bound > 0:
        raise UnsupportedDomainError(
            "total-rotation relation is only asserted on flat domains")
    tau_P = np.asarray(trace.tau_P, dtype=float)
    tau_E = np.asarray(trace.tau_E, dtype=float)
    worst = -math.inf
    index = None
    sharp = getattr(trace, "stride", 1) == 1
    if sharp and len(tau_P) >= 2:
        vals = tau_P[1:] - tau_E[:-1] - math.pi
        j = int(np.argmax(vals))
        worst, index = float(vals[j]), int(trace.steps[j + 1])
    else:
        vals = tau_P - tau_E - math.pi
        j = int(np.argmax(vals))
        worst, index = float(vals[j]), int(trace.steps[j])
    return CheckReport("tc_relation", worst <= tol, worst, index, tol,
                       context={"sharp": sharp})


@dataclass
class SqrtBoundReport:
    L0: float
    L_final: float
    B: float
    C: float
    B_continuous: float
    C_continuous: float
    margins: np.ndarray
    worst_margin: float
    worst_alpha_sq: Optional[float]
    b_degenerate: bool
    passed: bool
    tolerance: float

    def to_check(self):
        worst = max(-self.worst_margin,
                    self.worst_alpha_sq if self.worst_alpha_sq is not None else -math.inf)
        return CheckReport("sqrt_bound", self.passed, worst, None, self.tolerance,
                           context={"C": self.C, "B": self.B,
                                    "C_continuous": self.C_continuous,
                                    "B_continuous": self.B_continuous,
                                    "b_degenerate": self.b_degenerate})


def sqrt_bound_report(trace, tol=ANGLE_TOL):
    """Square-root total-rotation bound with its explicit constant.

    Works in units rescaled so the curvature bound is 1.  Requires a
    positively curved trace with rescaled initial separation below pi and no
    capture through the horizon.  Checks the margin series
    C*sqrt(n*D) - tau_P(n*D) and, on full-resolution traces, the per-step
    inequality alpha_tilde^2 <= 5*Delta*sin(D)/B.
    """
    K = trace.curvature_bound
    if K is None or K <= 0:
        raise UnsupportedDomainError(
            "the square-root bound addresses positively curved domains")
    s = math.sqrt(K)
    L0 = s * float(trace.L0)
    if L0 >= math.pi:
        raise HypothesisError(
            "initial separation %.6g is not below pi after rescaling; "
            "the bound's hypothesis fails" % L0)
    if trace.capture_step is not None:
        raise HypothesisError("pursuer captured; the bound addresses escape runs")
    D = s * trace.step_size
    ell = s * np.asarray(trace.L, dtype=float)
    L_final = float(ell[-1])
    B = trace.B_min
    if B is None:
        if len(ell) < 2:
            raise IncompleteTraceError("trace too short for the bound")
        B = float(np.min(np.sin(ell[1:]) * np.sin(ell[:-1] - D)))
    if B <= 0:
        raise HypothesisError("B = %.6g is not positive; bound degenerates" % B)
    C = math.sqrt(5.0 * max(L0 - L_final, 0.0) / B)
    t_hat = s * np.asarray(trace.t, dtype=float)
    tau = np.asarray(trace.tau_P, dtype=float)
    margins = C * np.sqrt(np.maximum(t_hat, 0.0)) - tau
    worst_margin = float(np.min(margins))
    worst_alpha_sq = None
    if getattr(trace, "stride", 1) == 1:
        atil = np.asarray(trace.alpha_tilde, dtype=float)
        dlt = s * np.asarray(trace.Delta, dtype=float)
        vals = []
        for j in range(len(atil)):
            if math.isfinite(atil[j]) and math.isfinite(dlt[j]):
                vals.append(atil[j] ** 2 - 5.0 * dlt[j] * math.sin(D) / B)
        if vals:
            worst_alpha_sq = float(max(vals))
    B_cont = min(math.sin(L0) ** 2, math.sin(L_final) ** 2)
    C_cont = math.sqrt(5.0 * max(L0 - L_final, 0.0) / B_cont) if B_cont > 0 else math.inf
    passed = worst_margin >= -tol and (worst_alpha_sq is None or worst_alpha_sq <= tol)
    return SqrtBoundReport(
        L0=L0, L_final=L_final, B=B, C=C,
        B_continuous=B_cont, C_continuous=C_cont,
        margins=margins, worst_margin=worst_margin,
        worst_alpha_sq=worst_alpha_sq,
        b_degenerate=B < 1e-3, passed=passed, tolerance=tol)


@dataclass
class Classification:
    kind: str                      # "capture" | "escape"
    capture_step: Optional[int]
    L_inf_estimate: Optional[float]
    tail_slope_per_step: Optional[float]
    tau_fit: Optional[GrowthFit]
    c_fit: Optional[GrowthFit]
    escape_confirmed: Optional[bool] = None


def fit_or_flat(t, y, tail_fraction=0.5):
    """Growth fit that treats an (eventually) flat zero series as exponent 0
    and drops leading nonpositive samples."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (t > 0) & np.isfinite(y)
    t, y = t[mask], y[mask]
    if len(t) == 0:
        return None
    if float(np.max(y)) <= 1e-12:
        return GrowthFit(exponent=0.0, half_width=0.0, n_points=len(t))
    pos = y > 0
    t, y = t[pos], y[pos]
    if len(t) < 10:
        return None
    try:
        return fit_growth_exponent(t, y, tail_fraction)
    except InsufficientDataError:
        return None


def capture_classifier(trace):
    """Capture step, or escape with an L_inf proxy and growth-exponent fits
    for the pursuer's total rotation and the evader's circumradius."""
    if trace.capture_step is not None:
        return Classification("capture", int(trace.capture_step),
                              None, None, None, None)
    if trace.total_steps < 100:
        raise InsufficientDataError(
            "need at least 100 steps to classify an escape, got %d"
            % trace.total_steps)
    steps = np.asarray(trace.steps, dtype=float)
    L = np.asarray(trace.L, dtype=float)
    n_tail = max(int(len(L) * 0.1), 2)
    xs = steps[-n_tail:]
    ys = L[-n_tail:]
    xm = xs - xs.mean()
    denom = float(np.dot(xm, xm))
    slope = float(np.dot(xm, ys - ys.mean())) / denom if denom > 0 else 0.0
    tau_fit = fit_or_flat(trace.t, trace.tau_P)
    c_fit = fit_or_flat(trace.t, trace.c_E)
    confirmed = trace.L_final > trace.step_size and slope > -1e-8
    return Classification("escape", None, float(trace.L_final), slope,
                          tau_fit, c_fit, escape_confirmed=confirmed)


# ---------------------------------------------------------------------------
# Triangle thinness sampling


def _model_side_point_gap(K, side1, side2, corner_angle, f1, f2):
    """Distance in the model between points at arclengths f1, f2 from the
    common corner along sides of the given lengths."""
    b1 = f1 * side1
    b2 = f2 * side2
    if K <= 0:
        x = np.array([b1, 0.0])
        y = b2 * geo.e_vec(corner_angle)
        return geo.norm(x - y)
    s = math.sqrt(K)
    cosd = (math.cos(b1 * s) * math.cos(b2 * s)
            + math.sin(b1 * s) * math.sin(b2 * s) * math.cos(corner_angle))
    return math.acos(min(1.0, max(-1.0, cosd))) / s


def thinness_sample(domain, trials=100, samples_per_triangle=4, rng=None,
                    tol=None, point_sampler=None, model_bound=None):
    """Sample random geodesic triangles and compare side-point gaps against
    the model triangle of the domain's curvature bound.

    Positive violations mean the domain is fatter than its declared model.
    Skipped triangles (degenerate or over the perimeter bound) are counted
    in the report context.
    """
    rng = rng or random.Random(0)
    K = domain.curvature_bound if model_bound is None else model_bound
    if tol is None:
        tol = ANGLE_TOL if domain.kind == "plane_minus_disks" else GEOM_TOL
    sampler = point_sampler or (lambda r: domain.random_point(r))
    threshold = math.inf if K <= 0 else 2.0 * math.pi / math.sqrt(K)
    worst = -math.inf
    worst_idx = None
    used = 0
    skipped = 0
    attempts = 0
    tb = TieBreak.upper()
    while used < trials and attempts < trials * 40:
        attempts += 1
        pts = [sampler(rng) for _ in range(3)]
        try:
            d01 = domain.distance(pts[0], pts[1])
            d02 = domain.distance(pts[0], pts[2])
            d12 = domain.distance(pts[1], pts[2])
        except Exception:
            skipped += 1
            continue
        sides = (d01, d02, d12)
        if min(sides) < 5e-2:
            skipped += 1
            continue
        if K > 0 and sum(sides) >= 0.95 * threshold:
            skipped += 1
            continue
        try:
            g01 = domain.shortest_path(pts[0], pts[1], tb)
            g02 = domain.shortest_path(pts[0], pts[2], tb)
            corner = comparison_angle(K, d12, d01, d02)
        except Exception:
            skipped += 1
            continue
        for _ in range(samples_per_triangle):
            f1 = rng.uniform(0.05, 0.95)
            f2 = rng.uniform(0.05, 0.95)
            x = g01.point_at(f1 * g01.length)
            y = g02.point_at(f2 * g02.length)
            try:
                gap_domain = domain.distance(x, y)
            except Exception:
                continue
            gap_model = _model_side_point_gap(K, d01, d02, corner, f1, f2)
            v = gap_domain - gap_model
            if v > worst:
                worst = v
                worst_idx = used
        used += 1
    if worst == -math.inf:
        worst = 0.0
    return CheckReport("triangle_thinness", worst <= tol, worst, worst_idx, tol,
                       context={"triangles": used, "skipped": skipped,
                                "curvature_bound": K})


# ---------------------------------------------------------------------------
# First variation


def first_variation_check(domain, path1, path2, h, tol=None):
    """Finite-difference check of the distance derivative between two unit
    speed geodesics: (r(h) - r(0))/h against -(cos a1 + cos a2)."""
    if path1.length < h or path2.length < h:
        raise RangeError("both geodesics must extend at least to h")
    p1 = path1.point_at(0.0)
    p2 = path2.point_at(0.0)
    r0 = domain.distance(p1, p2)
    if r0 <= GEOM_TOL:
        raise RangeError("geodesics start at the same point")
    if domain.curvature_bound > 0 and r0 >= domain.threshold:
        raise HypothesisError("initial gap exceeds the uniqueness threshold")
    conn = domain.shortest_path(p1, p2, None)
    a1 = domain.angle_between_directions(
        p1, path1.direction("start"), conn.direction("start"))
    a2 = domain.angle_between_directions(
        p2, path2.direction("start"),
        domain.reverse_direction(p2, conn.direction("finish")))
    rh = domain.distance(path1.point_at(h), path2.point_at(h))
    fd = (rh - r0) / h
    expected = -(math.cos(a1) + math.cos(a2))
    viol = abs(fd - expected)
    if tol is None:
        tol = 10.0 * h + 1e-8
    return CheckReport("first_variation", viol <= tol, viol, None, tol,
                       context={"a1": a1, "a2": a2, "fd": fd, "expected": expected})


# ---------------------------------------------------------------------------
# Binary words


def thue_morse_word(n):
    """First n letters over {1, 2} by bit-count parity."""
    if n < 1:
        raise RangeError("word length must be at least 1")
    return [1 + (bin(k).count("1") & 1) for k in range(n)]


def is_cube_free(word):
    """Brute-force scan for any subword repeated three times in a row."""
    w = bytes(word)
    n = len(w)
    for length in range(1, n // 3 + 1):
        for i in range(n - 3 * length + 1):
            if w[i] != w[i + length]:
                continue
            if (w[i:i + length] == w[i + length:i + 2 * length]
                    and w[i:i + length] == w[i + 2 * length:i + 3 * length]):
                return False
    return True


# ---------------------------------------------------------------------------
# Limit-geodesic diagnostic


@dataclass
class WindowDiagnostic:
    applicable: bool
    widths: list
    t0_grid: list
    values: list            # one series per width
    converged: Optional[bool]


def limit_geodesic_diagnostic(trace, widths=(1.0, 2.0), n_windows=8):
    """Window total rotations of the pursuit curve at growing window centers.

    Only meaningful for escape runs; a captured trace returns an inapplicable
    report.  The diagnostic converges when every width's final window value
    is at most 1e-3.
    """
    if trace.capture_step is not None:
        return WindowDiagnostic(False, list(widths), [], [], None)
    t = np.asarray(trace.t, dtype=float)
    tau = np.asarray(trace.tau_P, dtype=float)
    T = float(t[-1])

    def tau_at(x):
        i = int(np.searchsorted(t, x + 1e-12, side="right")) - 1
        return float(tau[min(max(i, 0), len(tau) - 1)])

    all_vals = []
    grid_out = []
    for w in widths:
        lo = max(w, 0.2 * T)
        hi = T - w
        if hi <= lo:
            all_vals.append([])
            grid_out.append([])
            continue
        grid = np.linspace(lo, hi, n_windows)
        vals = [tau_at(x + w) - tau_at(x - w) for x in grid]
        all_vals.append(vals)
        grid_out.append(list(grid))
    converged = all(vals[-1] <= 1e-3 for vals in all_vals if vals)
    return WindowDiagnostic(True, list(widths), grid_out, all_vals, converged)
