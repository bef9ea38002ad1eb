"""Polygonal-curve machinery.

Total rotation of a piecewise-geodesic curve is the sum over interior
vertices of (pi - beta), where beta is the angle between the incoming and
outgoing directions.  Curves whose connecting paths contain boundary arcs
still work: arcs are local geodesics of their domains, so only junction
turns contribute.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry as geo
from .domains import ArcPiece, GeodesicPath, LinePiece, PlaneMinusDisks, TieBreak
from .errors import (
    ConfigurationError,
    DegenerateError,
    FitError,
    InsufficientDataError,
    ModelTriangleError,
    PerimeterError,
    RangeError,
    UnsupportedDomainError,
)
from .tolerances import GEOM_TOL


@dataclass
class CurveSeries:
    """Sampled series over arclength: total rotation, circumradius, start distance."""

    t: np.ndarray
    tau: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None


class PolygonalCurve:
    """Vertex sequence in a domain with cached connecting geodesics."""

    def __init__(self, domain, vertices, tie_break=None):
        if len(vertices) < 2:
            raise DegenerateError("a polygonal curve needs at least two vertices")
        self.domain = domain
        self.tie_break = tie_break if tie_break is not None else TieBreak.upper()
        self.vertices = [domain.validate_point(v) for v in vertices]
        self.paths = []
        for a, b in zip(self.vertices, self.vertices[1:]):
            path = domain.shortest_path(a, b, self.tie_break)
            if path.length <= 0.0:
                raise DegenerateError("repeated consecutive vertex in polygonal curve")
            if domain.curvature_bound > 0 and path.length >= domain.threshold:
                raise RangeError(
                    "consecutive vertices at distance %g >= threshold %g"
                    % (path.length, domain.threshold))
            self.paths.append(path)
        self.cumlen = np.concatenate(
            [[0.0], np.cumsum([p.length for p in self.paths])])

    @property
    def length(self):
        return float(self.cumlen[-1])

    def turn_angles(self):
        """Turn (pi - beta) at each interior vertex, from cached path directions."""
        dom = self.domain
        turns = np.zeros(max(len(self.vertices) - 2, 0))
        for i in range(1, len(self.vertices) - 1):
            d_in = self.paths[i - 1].direction("finish")
            d_out = self.paths[i].direction("start")
            beta = dom.angle_between_directions(
                self.vertices[i], dom.reverse_direction(self.vertices[i], d_in), d_out)
            turns[i - 1] = math.pi - beta
        return turns

    def point_at(self, t):
        if t < -GEOM_TOL or t > self.length + GEOM_TOL:
            raise RangeError("arclength %r outside [0, %r]" % (t, self.length))
        t = min(max(t, 0.0), self.length)
        i = int(np.searchsorted(self.cumlen, t, side="right")) - 1
        i = min(i, len(self.paths) - 1)
        return self.paths[i].point_at(t - self.cumlen[i])


def total_rotation(curve):
    """Sum of interior turns; nonnegative because every beta lies in [0, pi]."""
    return float(np.sum(curve.turn_angles()))


def tc_function(curve):
    """Right-continuous total-rotation step function sampled at the vertices."""
    turns = curve.turn_angles()
    tau = np.zeros(len(curve.vertices))
    if len(turns):
        tau[1:-1] = np.cumsum(turns)
        tau[-1] = tau[-2]
    return CurveSeries(t=curve.cumlen.copy(), tau=tau)


def circumradius_function(curve, samples_per_piece=64):
    """Running max of start distance, sampled at vertices.

    For flat domains the max over a geodesic piece sits at its endpoints, so
    vertices suffice; positively curved domains sample piece interiors.
    Containment uses the domain's radial metric (planar balls for embedded
    planar domains).
    """
    dom = curve.domain
    sample_inside = dom.curvature_bound > 0
    if sample_inside and samples_per_piece < 1:
        raise ConfigurationError("samples_per_piece must be >= 1 for curved domains")
    base = curve.vertices[0]
    n = len(curve.vertices)
    c = np.zeros(n)
    r = np.zeros(n)
    running = 0.0
    for i, path in enumerate(curve.paths):
        if sample_inside:
            for k in range(1, samples_per_piece + 1):
                s = path.length * k / (samples_per_piece + 1)
                running = max(running, dom.radial_distance(base, path.point_at(s)))
        rv = dom.radial_distance(base, curve.vertices[i + 1])
        running = max(running, rv)
        r[i + 1] = rv
        c[i + 1] = running
    return CurveSeries(t=curve.cumlen.copy(), c=c, r=r)


def comparison_angle(curvature_bound, a, b, c):
    """Angle opposite side a in the model triangle with sides a, b, c.

    Flat model for curvature_bound == 0; sphere of radius 1/sqrt(K) for
    K > 0 (requires perimeter < 2*pi/sqrt(K)).
    """
    k = float(curvature_bound)
    if k < 0:
        k = 0.0
    a, b, c = float(a), float(b), float(c)
    if min(a, b, c) < -1e-15:
        raise ModelTriangleError("negative side length")
    if b <= 1e-15 or c <= 1e-15:
        raise DegenerateError("angle vertex coincides with another vertex")
    slack = 1e-12 * (1.0 + a + b + c)
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise ModelTriangleError(
            "sides (%g, %g, %g) violate the triangle inequality" % (a, b, c))
    if k == 0.0:
        cos_a = (b * b + c * c - a * a) / (2.0 * b * c)
        return math.acos(min(1.0, max(-1.0, cos_a)))
    s = math.sqrt(k)
    if (a + b + c) * s >= 2.0 * math.pi:
        raise PerimeterError(
            "perimeter %g exceeds model bound %g" % (a + b + c, 2.0 * math.pi / s))
    num = math.cos(a * s) - math.cos(b * s) * math.cos(c * s)
    den = math.sin(b * s) * math.sin(c * s)
    return math.acos(min(1.0, max(-1.0, num / den)))


@dataclass
class ChordArcSubarc:
    start_index: int
    end_index: int
    internal_rotation: float
    arc_length: float
    chord: float

    @property
    def ratio(self):
        return self.arc_length / self.chord if self.chord > 0 else math.inf


@dataclass
class ChordArcReport:
    subarcs: list
    total_rotation: float
    total_length: float
    sup_chord: float
    max_ratio: float
    partition_count: int
    count_bound: float
    aggregate_applicable: bool
    aggregate_bound: Optional[float]
    aggregate_holds: Optional[bool]


def chord_arc_certificate(curve):
    """Greedy partition into subarcs of internal rotation <= pi/2.

    In a flat-bound domain each such subarc is no longer than sqrt(2) times
    its chord.  A vertex whose single turn exceeds pi/2 becomes a partition
    boundary, so its turn is internal to no subarc.  The aggregate bound
    total_length <= (tau/(pi/2)+1) * sqrt(2) * sup_chord is reported, and
    only checked when the partition count does not exceed tau/(pi/2)+1.
    """
    if curve.domain.curvature_bound > 0:
        raise UnsupportedDomainError(
            "chord-arc certificate requires a flat curvature bound")
    turns = curve.turn_angles()
    boundaries = [0]
    internal = 0.0
    for i, turn in enumerate(turns, start=1):
        if internal + turn > math.pi / 2.0 + 1e-12:
            boundaries.append(i)
            internal = 0.0
        else:
            internal += turn
    boundaries.append(len(curve.vertices) - 1)
    subarcs = []
    for s_idx, e_idx in zip(boundaries, boundaries[1:]):
        arc_len = float(curve.cumlen[e_idx] - curve.cumlen[s_idx])
        chord = curve.domain.distance(curve.vertices[s_idx], curve.vertices[e_idx])
        rot = float(np.sum(turns[s_idx:e_idx - 1])) if e_idx - s_idx > 1 else 0.0
        subarcs.append(ChordArcSubarc(s_idx, e_idx, rot, arc_len, chord))
    tau = float(np.sum(turns))
    sup_chord = max(s.chord for s in subarcs)
    count = len(subarcs)
    count_bound = tau / (math.pi / 2.0) + 1.0
    applicable = count <= count_bound + 1e-12
    bound = (count_bound) * math.sqrt(2.0) * sup_chord
    holds = curve.length <= bound + GEOM_TOL if applicable else None
    return ChordArcReport(
        subarcs=subarcs,
        total_rotation=tau,
        total_length=curve.length,
        sup_chord=sup_chord,
        max_ratio=max(s.ratio for s in subarcs),
        partition_count=count,
        count_bound=count_bound,
        aggregate_applicable=applicable,
        aggregate_bound=bound if applicable else None,
        aggregate_holds=holds,
    )


def spherical_length_bound(tau, d):
    """Length of the longest curve on the unit sphere with the given total
    rotation and endpoint separation: twice the leg of the isosceles
    once-broken geodesic, solved by monotone bisection.
    """
    tau = float(tau)
    d = float(d)
    if tau < 0 or d < 0:
        raise RangeError("tau and d must be nonnegative")
    if tau + d >= math.pi:
        raise RangeError("requires tau + d < pi, got %g" % (tau + d))
    if d == 0.0:
        return 0.0
    target = math.cos(d)
    cos_break = math.cos(math.pi - tau)

    def f(leg):
        cl = math.cos(leg)
        sl = math.sin(leg)
        return cl * cl + sl * sl * cos_break - target

    lo, hi = 0.0, math.pi / 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    return 2.0 * (0.5 * (lo + hi))


@dataclass
class GrowthFit:
    exponent: float
    half_width: float
    n_points: int


def fit_growth_exponent(t, y, tail_fraction=0.5):
    """Least-squares slope of log y against log t over the series tail.

    half_width is twice the standard error of the slope (zero for an exact
    power law).
    """
    if not (0.0 < tail_fraction <= 1.0):
        raise ConfigurationError("tail_fraction must lie in (0, 1]")
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ConfigurationError("t and y must be matching 1-d arrays")
    n_tail = max(int(math.ceil(len(t) * tail_fraction)), 2)
    tt = t[-n_tail:]
    yy = y[-n_tail:]
    if len(tt) < 10:
        raise InsufficientDataError("need at least 10 tail points, got %d" % len(tt))
    if np.any(tt <= 0) or np.any(yy <= 0):
        raise FitError("growth fit needs strictly positive samples")
    x = np.log(tt)
    z = np.log(yy)
    xm = x - x.mean()
    denom = float(np.dot(xm, xm))
    if denom == 0.0:
        raise FitError("degenerate abscissa for growth fit")
    slope = float(np.dot(xm, z)) / denom
    resid = z - (z.mean() + slope * xm)
    dof = max(len(tt) - 2, 1)
    se = math.sqrt(float(np.dot(resid, resid)) / dof / denom)
    return GrowthFit(exponent=slope, half_width=2.0 * se, n_points=len(tt))


@dataclass
class RayFit:
    origin: np.ndarray
    direction: np.ndarray
    t: np.ndarray
    residuals: np.ndarray
    fit: Optional[GrowthFit]


def asymptotic_ray_fit(curve, fit_range=None):
    """Fit the ray from the curve start through its endpoint and report the
    perpendicular residual series with its growth exponent.

    fit_range=(t_lo, t_hi) restricts the exponent fit; residuals there must
    be positive.  A residual series that is identically zero (straight
    curve) reports fit=None.
    """
    dom = curve.domain
    if dom.kind != "euclidean":
        raise UnsupportedDomainError("ray fitting is defined on euclidean space")
    verts = np.asarray(curve.vertices, dtype=float)
    origin = verts[0]
    disp = verts[-1] - origin
    if geo.norm(disp) == 0.0:
        raise FitError("zero displacement: no ray direction")
    direction = disp / geo.norm(disp)
    rel = verts - origin
    proj = np.maximum(rel @ direction, 0.0)
    feet = origin + np.outer(proj, direction)
    residuals = np.linalg.norm(verts - feet, axis=1)
    t = curve.cumlen.copy()
    if fit_range is not None:
        lo, hi = fit_range
        mask = (t >= lo) & (t <= hi)
    else:
        # the chord ray passes through the endpoint, whose residual is 0 by
        # construction; the default fit window skips exact zeros
        mask = (t > 0) & (residuals > 1e-12)
    fit = None
    if np.any(mask) and float(np.max(residuals[mask])) > 1e-12:
        fit = fit_growth_exponent(t[mask], residuals[mask], tail_fraction=1.0)
    return RayFit(origin=origin, direction=direction, t=t,
                  residuals=residuals, fit=fit)


def window_total_rotation(curve, t0, width):
    """tau(t0 + width) - tau(t0 - width) of the right-continuous step function."""
    series = tc_function(curve)
    lo, hi = t0 - width, t0 + width
    if lo < -GEOM_TOL or hi > curve.length + GEOM_TOL:
        raise RangeError(
            "window [%g, %g] outside the curve range [0, %g]" % (lo, hi, curve.length))

    def tau_at(x):
        i = int(np.searchsorted(series.t, x + 1e-15, side="right")) - 1
        i = min(max(i, 0), len(series.tau) - 1)
        return float(series.tau[i])

    return tau_at(hi) - tau_at(lo)


def build_winding_geodesic(domain, word):
    """Local geodesic weaving around the two removed circles of a planar
    two-disk domain, touching circle ``word[j]`` tangentially at the j-th
    contact.

    Transitions between the circles run along inner bitangents, so the wrap
    handedness alternates contact to contact (first contact counterclockwise).
    A run of k equal letters becomes one contact with k-1 extra full circuits.
    Lead-in and lead-out segments start and end at the midpoints of the
    corresponding bitangents.
    """
    if not isinstance(domain, PlaneMinusDisks) or len(domain.disks) != 2:
        raise UnsupportedDomainError(
            "winding geodesics need a plane-minus-disks domain with exactly 2 disks")
    if not word:
        raise ConfigurationError("word must be nonempty")
    if any(l not in (1, 2) for l in word):
        raise ConfigurationError("word letters must be 1 or 2")

    runs = []
    for letter in word:
        if runs and runs[-1][0] == letter:
            runs[-1][1] += 1
        else:
            runs.append([letter, 1])

    def inner_transition(idx_from, idx_to, handedness):
        """Touch data for the inner bitangent leaving circle idx_from with the
        given handedness: (angle_from, point_from, angle_to, point_to)."""
        c1, r1 = domain.disks[idx_from]
        c2, r2 = domain.disks[idx_to]
        d = geo.norm(c2 - c1)
        az = geo.azimuth(c2 - c1)
        off = math.acos(min(1.0, (r1 + r2) / d))
        for s in (1.0, -1.0):
            a1 = az + s * off
            t1 = c1 + r1 * geo.e_vec(a1)
            a2 = a1 + math.pi
            t2 = c2 + r2 * geo.e_vec(a2)
            travel = geo.unit(t2 - t1)
            if float(np.dot(travel, handedness * geo.ccw_tangent(a1))) > 0.5:
                return a1, t1, a2, t2
        raise DegenerateError("no inner bitangent matches the handedness")

    contacts = [run[0] - 1 for run in runs]
    handed = [1 if j % 2 == 0 else -1 for j in range(len(runs))]

    lead_in = inner_transition(1 - contacts[0], contacts[0], -handed[0])
    arrivals = [lead_in[2]]
    departures = []
    lines = [(0.5 * (lead_in[1] + lead_in[3]), lead_in[3])]
    for j in range(len(runs) - 1):
        tr = inner_transition(contacts[j], contacts[j + 1], handed[j])
        departures.append(tr[0])
        arrivals.append(tr[2])
        lines.append((tr[1], tr[3]))
    lead_out = inner_transition(contacts[-1], 1 - contacts[-1], handed[-1])
    departures.append(lead_out[0])
    lines.append((lead_out[1], 0.5 * (lead_out[1] + lead_out[3])))

    pieces = [LinePiece(*lines[0])]
    for j, (circle, (_, count)) in enumerate(zip(contacts, runs)):
        c, r = domain.disks[circle]
        h = handed[j]
        if h > 0:
            sweep = geo.ccw_gap(arrivals[j], departures[j])
        else:
            sweep = -geo.ccw_gap(departures[j], arrivals[j])
        sweep += h * geo.TWO_PI * (count - 1)
        if abs(sweep) > 0.0:
            pieces.append(ArcPiece(c, r, arrivals[j], sweep))
        pieces.append(LinePiece(*lines[j + 1]))
    return GeodesicPath(domain, pieces)
