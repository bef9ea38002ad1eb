"""Discrete simple-pursuit engine, evader policies, and dyadic refinement.

Game convention: at step i both agents read the state (P_i, E_i).  The
pursuer moves to P_{i+1}, the point at distance D along the geodesic from
P_i toward E_i; the evader moves to any E_{i+1} within step distance D.
Capture is declared at the start of a step, before anyone moves, when the
separation is at most D.

Recorded per step i (on the row for state i): separation L_i, the angles of
the degenerate quadrangle P_i, E_i, E_{i+1}, P_{i+1} (alpha at P_{i+1}
between the geodesics to E_i and E_{i+1}; its model comparison alpha_tilde;
the pursuer interior angle beta; phi and delta at E_i and E_{i+1}; the
evader interior angle theta at E_i), the drop Delta_i = L_i - L_{i+1}, and
running totals.  tau_P at row k sums the pursuer turns at P_1..P_{k-1},
which are known once step k-1 completes; tau_E at row k sums the evader
turns at E_1..E_{k-1}.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from .curves import comparison_angle
from .domains import EuclideanSpace, PlaneMinusDisks, TieBreak, TreePoint
from .errors import (
    CaptureSignal,
    ConfigurationError,
    DegenerateError,
    HypothesisError,
    InvalidPointError,
    ModelTriangleError,
    PolicyViolationError,
    UnsupportedDomainError,
)
from .tolerances import GEOM_TOL

NAN = float("nan")


# ---------------------------------------------------------------------------
# Policies


@dataclass
class StepContext:
    domain: object
    step: int
    step_size: float
    evader: object
    pursuer: object
    pursuer_next: object
    rng: random.Random


class EvaderPolicy:
    """Base policy.  reset() returns E_0; propose() returns E_{i+1}."""

    name = "policy"
    stochastic = False

    def reset(self, domain, pursuer_start):
        raise NotImplementedError

    def propose(self, ctx):
        raise NotImplementedError

    def curve(self, domain):
        """Continuous unit-speed-or-slower track E(t), when one exists."""
        return None


class GeodesicRunner(EvaderPolicy):
    """Runs along a fixed geodesic: a straight direction in flat embedded
    domains, a great circle on the sphere, or toward a far target point."""

    name = "geodesic_runner"

    def __init__(self, start, direction=None, target=None):
        if (direction is None) == (target is None):
            raise ConfigurationError("give exactly one of direction or target")
        self.start = start
        self.direction = None if direction is None else np.asarray(direction, dtype=float)
        self.target = target
        self._frame = None
        self._angle = 0.0

    def reset(self, domain, pursuer_start):
        self._pos = domain.validate_point(self.start)
        if self.direction is not None and domain.kind == "sphere":
            u = self._pos / domain.radius
            w = np.asarray(self.direction, dtype=float)
            w = w - float(np.dot(w, u)) * u
            self._frame = (u, geo.unit(w))
            self._angle = 0.0
        elif self.direction is not None:
            self.direction = geo.unit(self.direction)
        return self._pos

    def propose(self, ctx):
        dom = ctx.domain
        if self.direction is not None:
            if dom.kind == "sphere":
                self._angle += ctx.step_size / dom.radius
                u, w = self._frame
                self._pos = dom.radius * (
                    math.cos(self._angle) * u + math.sin(self._angle) * w)
                return self._pos
            candidate = self._pos + ctx.step_size * self.direction
            try:
                dom.validate_point(candidate)
            except InvalidPointError:
                candidate = self._clamp_step(dom, ctx.step_size)
            self._pos = candidate
            return self._pos
        path = dom.shortest_path(self._pos, self.target, TieBreak.upper())
        if path.length <= GEOM_TOL:
            return self._pos
        self._pos = path.point_at(min(ctx.step_size, path.length))
        return self._pos

    def _clamp_step(self, dom, step):
        lo, hi = 0.0, step
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            try:
                dom.validate_point(self._pos + mid * self.direction)
                lo = mid
            except InvalidPointError:
                hi = mid
        return self._pos + lo * self.direction

    def curve(self, domain):
        start = domain.validate_point(self.start)
        if self.direction is not None and domain.kind == "sphere":
            u = start / domain.radius
            w = np.asarray(self.direction, dtype=float)
            w = geo.unit(w - float(np.dot(w, u)) * u)

            def track(t):
                a = t / domain.radius
                return domain.radius * (math.cos(a) * u + math.sin(a) * w)

            return track
        if self.direction is not None:
            d = geo.unit(self.direction)
            return lambda t: start + t * d
        target_path = domain.shortest_path(start, self.target, TieBreak.upper())

        def track(t):
            return target_path.point_at(min(t, target_path.length))

        return track


class Waypoints(EvaderPolicy):
    """Moves along the geodesic polyline through the waypoints; the step may
    end short of D at a waypoint (no corner cutting), then continues."""

    name = "waypoints"

    def __init__(self, start, points):
        if not points:
            raise ConfigurationError("waypoints list must be nonempty")
        self.start = start
        self.points = list(points)

    def reset(self, domain, pursuer_start):
        self._pos = domain.validate_point(self.start)
        self._idx = 0
        return self._pos

    def propose(self, ctx):
        dom = ctx.domain
        remaining = ctx.step_size
        pos = self._pos
        while remaining > GEOM_TOL and self._idx < len(self.points):
            path = dom.shortest_path(pos, self.points[self._idx], TieBreak.upper())
            if path.length <= remaining + GEOM_TOL:
                pos = dom.validate_point(self.points[self._idx])
                remaining -= path.length
                self._idx += 1
            else:
                pos = path.point_at(remaining)
                remaining = 0.0
        self._pos = pos
        return pos

    def curve(self, domain):
        start = domain.validate_point(self.start)
        anchors = [start] + [domain.validate_point(p) for p in self.points]
        paths = [domain.shortest_path(a, b, TieBreak.upper())
                 for a, b in zip(anchors, anchors[1:])]
        cum = np.concatenate([[0.0], np.cumsum([p.length for p in paths])])

        def track(t):
            if t >= cum[-1]:
                return anchors[-1]
            i = int(np.searchsorted(cum, t, side="right")) - 1
            return paths[i].point_at(t - cum[i])

        return track


class SpiralPolicy(EvaderPolicy):
    """Follows the planar spiral u -> (u cos 2*pi*u, u sin 2*pi*u) with unit
    chord steps (plane only)."""

    name = "spiral"

    def __init__(self, u0=1.0):
        self.u0 = float(u0)

    @staticmethod
    def position(u):
        a = 2.0 * math.pi * u
        return np.array([u * math.cos(a), u * math.sin(a)])

    def reset(self, domain, pursuer_start):
        if domain.kind != "euclidean" or domain.dim != 2:
            raise UnsupportedDomainError("spiral evader lives in the plane")
        self._u = self.u0
        return self.position(self._u)

    def propose(self, ctx):
        base = self.position(self._u)
        target = ctx.step_size
        hi = self._u
        step = 0.25
        while geo.norm(self.position(hi) - base) < target:
            hi += step
        lo = self._u
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if geo.norm(self.position(mid) - base) < target:
                lo = mid
            else:
                hi = mid
        self._u = 0.5 * (lo + hi)
        return self.position(self._u)


class AntipodalOscillator(EvaderPolicy):
    """Stays antipodal to the pursuer on a removed-disk boundary circle.

    The evader's rotation equals the pursuer's angular advance, so its step
    never exceeds D.  Combined with an alternating tie-break this drives the
    boundary oscillation scenario.
    """

    name = "antipodal_oscillator"

    def __init__(self, disk=0):
        self.disk = int(disk)

    def reset(self, domain, pursuer_start):
        if not isinstance(domain, PlaneMinusDisks):
            raise UnsupportedDomainError("antipodal oscillation needs a removed disk")
        c, r = domain.disks[self.disk]
        p = domain.validate_point(pursuer_start)
        if abs(geo.norm(p - c) - r) > GEOM_TOL:
            raise ConfigurationError("pursuer must start on the boundary circle")
        self._center = c
        self._radius = r
        return c - (p - c)

    def propose(self, ctx):
        rel = np.asarray(ctx.pursuer_next, dtype=float) - self._center
        rel = rel / geo.norm(rel) * self._radius
        return self._center - rel


class CircleOrbiter(EvaderPolicy):
    """Runs at constant speed around a removed-disk boundary circle, starting
    an arc length ahead of the pursuer (who must start on the circle)."""

    name = "circle_orbiter"

    def __init__(self, disk=0, arc_ahead=1.0, orientation=1):
        self.disk = int(disk)
        self.arc_ahead = float(arc_ahead)
        self.orientation = 1 if orientation >= 0 else -1

    def reset(self, domain, pursuer_start):
        if not isinstance(domain, PlaneMinusDisks):
            raise UnsupportedDomainError("circle orbits need a removed disk")
        c, r = domain.disks[self.disk]
        p = domain.validate_point(pursuer_start)
        if abs(geo.norm(p - c) - r) > GEOM_TOL:
            raise ConfigurationError("pursuer must start on the boundary circle")
        self._center, self._radius = c, r
        self._angle = geo.azimuth(p - c) + self.orientation * self.arc_ahead / r
        return self._point()

    def _point(self):
        return self._center + self._radius * geo.e_vec(self._angle)

    def propose(self, ctx):
        self._angle += self.orientation * ctx.step_size / self._radius
        return self._point()

    def curve(self, domain):
        c, r = domain.disks[self.disk]
        a0 = self._angle
        ori = self.orientation

        def track(t):
            return c + r * geo.e_vec(a0 + ori * t / r)

        return track


class RandomWalkPolicy(EvaderPolicy):
    """Seeded random walk: a random direction step of length D, rejected and
    resampled when it leaves the domain (random branch walks on trees)."""

    name = "random_walk"
    stochastic = True

    def __init__(self, start):
        self.start = start

    def reset(self, domain, pursuer_start):
        self._pos = domain.validate_point(self.start)
        return self._pos

    def propose(self, ctx):
        dom = ctx.domain
        rng = ctx.rng
        if dom.kind == "metric_tree":
            self._pos = self._tree_step(dom, rng, ctx.step_size)
            return self._pos
        if dom.kind == "sphere":
            u = self._pos / dom.radius
            for _ in range(32):
                w = np.array([rng.gauss(0, 1) for _ in range(3)])
                w = w - float(np.dot(w, u)) * u
                if geo.norm(w) > 1e-9:
                    w = geo.unit(w)
                    a = ctx.step_size / dom.radius
                    self._pos = dom.radius * (math.cos(a) * u + math.sin(a) * w)
                    return self._pos
            return self._pos
        for _ in range(32):
            ang = rng.uniform(0.0, geo.TWO_PI)
            if dom.kind == "euclidean" and dom.dim != 2:
                step = np.array([rng.gauss(0, 1) for _ in range(dom.dim)])
                step = geo.unit(step) * ctx.step_size
            else:
                step = ctx.step_size * geo.e_vec(ang)
            candidate = self._pos + step
            try:
                dom.validate_point(candidate)
            except InvalidPointError:
                continue
            if isinstance(dom, PlaneMinusDisks) and not dom._segment_clear(
                    self._pos, candidate):
                continue
            self._pos = candidate
            return self._pos
        return self._pos

    def _tree_step(self, dom, rng, budget):
        p = dom.validate_point(self._pos)
        edge, off = p.edge, p.offset
        direction = rng.choice((1, -1))
        while budget > 0.0:
            ln = dom.edge_len[edge]
            if direction > 0:
                room = ln - off
                if budget <= room:
                    off += budget
                    break
                budget -= room
                vertex = dom.edge_v[edge]
            else:
                room = off
                if budget <= room:
                    off -= budget
                    break
                budget -= room
                vertex = dom.edge_u[edge]
            options = dom.adj[vertex]
            eid, _ = options[rng.randrange(len(options))]
            edge = eid
            off = 0.0 if dom.edge_u[eid] == vertex else dom.edge_len[eid]
            direction = 1 if off == 0.0 else -1
        return dom.validate_point(TreePoint(edge, off))


class PrescribedCurve(EvaderPolicy):
    """Samples a given unit-speed-or-slower track E(t) at the step times."""

    name = "prescribed_curve"

    def __init__(self, track, label="prescribed_curve"):
        self.track = track
        self.name = label

    def reset(self, domain, pursuer_start):
        self._i = 0
        return domain.validate_point(self.track(0.0))

    def propose(self, ctx):
        self._i += 1
        return self.track(self._i * ctx.step_size)

    def curve(self, domain):
        return self.track


# ---------------------------------------------------------------------------
# Trace


@dataclass
class PursuitTrace:
    """Full record of a pursuit run, sampled every ``stride`` steps."""

    step_size: float
    stride: int
    curvature_bound: float
    steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    L: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    Delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tau_P: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tau_E: np.ndarray = field(default_factory=lambda: np.zeros(0))
    c_P: np.ndarray = field(default_factory=lambda: np.zeros(0))
    c_E: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r_P: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r_E: np.ndarray = field(default_factory=lambda: np.zeros(0))
    P_points: list = field(default_factory=list)
    E_points: list = field(default_factory=list)
    capture_step: Optional[int] = None
    total_steps: int = 0
    L0: float = 0.0
    L_final: float = 0.0
    B_min: Optional[float] = None
    worst_monotone: Optional[float] = None
    domain: object = None
    policy_name: str = ""
    seed: Optional[int] = None
    tie_break_mode: str = TieBreak.UPPER

    @property
    def captured(self):
        return self.capture_step is not None


class _Recorder:
    _SERIES = ("steps", "t", "L", "alpha", "alpha_tilde", "beta", "phi",
               "delta", "theta", "Delta", "tau_P", "tau_E", "c_P", "c_E",
               "r_P", "r_E")

    def __init__(self, stride):
        self.stride = max(int(stride), 1)
        self.rows = {k: [] for k in self._SERIES}
        self.P_points = []
        self.E_points = []
        self._pending = None

    def want(self, i):
        return i % self.stride == 0

    def open_row(self, i, t, L, tau_P, tau_E, c_P, c_E, r_P, r_E, P, E):
        self._pending = dict(steps=i, t=t, L=L, alpha=NAN, alpha_tilde=NAN,
                             beta=NAN, phi=NAN, delta=NAN, theta=NAN,
                             Delta=NAN, tau_P=tau_P, tau_E=tau_E,
                             c_P=c_P, c_E=c_E, r_P=r_P, r_E=r_E)
        self._pending_points = (P, E)

    def fill_angles(self, **kw):
        if self._pending is not None:
            self._pending.update(kw)

    def flush(self):
        if self._pending is None:
            return
        for k in self._SERIES:
            self.rows[k].append(self._pending[k])
        P, E = self._pending_points
        self.P_points.append(P)
        self.E_points.append(E)
        self._pending = None

    def install(self, trace):
        for k in self._SERIES:
            dtype = int if k == "steps" else float
            setattr(trace, k, np.asarray(self.rows[k], dtype=dtype))
        trace.P_points = self.P_points
        trace.E_points = self.E_points


def _radial_max_along(domain, base, path, upto, samples):
    """Max radial distance from base over path[0, upto], sampled."""
    best = domain.radial_distance(base, path.point_at(upto))
    if domain.curvature_bound > 0 and samples > 0:
        for k in range(1, samples + 1):
            s = upto * k / (samples + 1)
            best = max(best, domain.radial_distance(base, path.point_at(s)))
    return best


def pursuit_step(domain, pursuer, evader, step_size, tie_break=None):
    """One pursuer move: the point at distance D along the geodesic toward
    the evader.  Raises CaptureSignal when the separation is already <= D."""
    p = domain.validate_point(pursuer)
    e = domain.validate_point(evader)
    path = domain.shortest_path(p, e, tie_break)
    if path.length <= step_size:
        raise CaptureSignal(path.length)
    return path.point_at(step_size)


def run_discrete(domain, pursuer_start, policy, step_size, max_steps,
                 tie_break=None, seed=None, allow_long_start=False,
                 record_stride=1, circ_samples=16):
    """Run the discrete game and return a fully populated PursuitTrace."""
    D = float(step_size)
    if D <= 0:
        raise ConfigurationError("step_size must be positive")
    if max_steps < 1:
        raise ConfigurationError("max_steps must be at least 1")
    tb = tie_break if tie_break is not None else TieBreak.upper()
    rng = random.Random(seed)
    P = domain.validate_point(pursuer_start)
    E = domain.validate_point(policy.reset(domain, P))
    L0 = domain.distance(P, E)
    if domain.curvature_bound > 0 and not allow_long_start:
        if L0 >= domain.threshold:
            raise HypothesisError(
                "initial separation %g is not below the uniqueness threshold %g; "
                "set allow_long_start to run anyway" % (L0, domain.threshold))

    if (isinstance(domain, EuclideanSpace) and domain.dim == 2
            and isinstance(policy, GeodesicRunner) and policy.direction is not None
            and L0 > D):
        return _run_runner_planar(domain, P, policy, D, max_steps,
                                  record_stride, seed, tb.mode)

    rec = _Recorder(record_stride)
    trace = PursuitTrace(step_size=D, stride=rec.stride,
                         curvature_bound=domain.curvature_bound,
                         domain=domain, policy_name=policy.name, seed=seed,
                         tie_break_mode=tb.mode)
    trace.L0 = L0
    sqrt_k = math.sqrt(domain.curvature_bound) if domain.curvature_bound > 0 else None

    g = domain.shortest_path(P, E, tb)
    L = g.length
    P0_cache = P
    E0_cache = E
    tau_P_lagged = 0.0
    pending_turn = 0.0
    tau_E_total = 0.0
    c_P = 0.0
    c_E = 0.0
    b_min = math.inf
    worst_mono = -math.inf
    prev_e_in = None  # travel direction into the current evader vertex
    i = 0
    while True:
        capture_now = L <= D
        stop_now = i >= max_steps
        keep = rec.want(i) or capture_now or stop_now
        if keep:
            rec.open_row(i, i * D, L, tau_P_lagged, tau_E_total, c_P, c_E,
                         domain.radial_distance(P0_cache, P),
                         domain.radial_distance(E0_cache, E), P, E)
        if capture_now or stop_now:
            rec.flush()
            break
        P_next = g.point_at(D)
        dir_to_E = g.travel_direction_at(D)
        back_dir = domain.reverse_direction(P_next, dir_to_E)
        E_next = policy.propose(StepContext(domain, i, D, E, P, P_next, rng))
        try:
            E_next = domain.validate_point(E_next)
        except InvalidPointError as exc:
            raise PolicyViolationError(
                "step %d: policy proposed an invalid point (%s)" % (i, exc), step=i)
        e_len = domain.distance(E, E_next)
        if e_len > D + 1e-12:
            raise PolicyViolationError(
                "step %d: policy step %g exceeds the bound %g" % (i, e_len, D), step=i)
        e_path = domain.shortest_path(E, E_next, tb) if e_len > GEOM_TOL else None
        g_next = domain.shortest_path(P_next, E_next, tb)
        L_next = g_next.length

        alpha = beta = NAN
        turn_P = 0.0
        if L_next > GEOM_TOL:
            out_dir = g_next.direction("start")
            alpha = domain.angle_between_directions(P_next, dir_to_E, out_dir)
            beta = domain.angle_between_directions(P_next, back_dir, out_dir)
            turn_P = math.pi - beta
        alpha_tilde = NAN
        try:
            alpha_tilde = comparison_angle(
                domain.curvature_bound, e_len, max(L - D, 0.0), L_next)
        except (ModelTriangleError, DegenerateError):
            pass
        phi = delta = theta = NAN
        turn_E = 0.0
        if e_path is not None:
            to_P_next = domain.reverse_direction(E, g.travel_direction_at(g.length))
            e_out = e_path.direction("start")
            phi = domain.angle_between_directions(E, to_P_next, e_out)
            if L_next > GEOM_TOL:
                to_P_at_Enext = domain.reverse_direction(
                    E_next, g_next.travel_direction_at(g_next.length))
                back_to_E = domain.reverse_direction(
                    E_next, e_path.travel_direction_at(e_path.length))
                delta = domain.angle_between_directions(E_next, to_P_at_Enext, back_to_E)
            if prev_e_in is not None:
                theta = domain.angle_between_directions(
                    E, domain.reverse_direction(E, prev_e_in), e_out)
                turn_E = math.pi - theta
        rec.fill_angles(alpha=alpha, alpha_tilde=alpha_tilde, beta=beta,
                        phi=phi, delta=delta, theta=theta, Delta=L - L_next)
        rec.flush()

        worst_mono = max(worst_mono, L_next - L)
        if sqrt_k is not None:
            term = math.sin(sqrt_k * L_next) * math.sin(sqrt_k * (L - D))
            b_min = min(b_min, term)
        c_P = max(c_P, _radial_max_along(domain, P0_cache, g, D, circ_samples))
        if e_path is not None:
            c_E = max(c_E, _radial_max_along(
                domain, E0_cache, e_path, e_path.length, circ_samples))
            prev_e_in = e_path.travel_direction_at(e_path.length)
        tau_P_lagged += pending_turn
        pending_turn = turn_P
        tau_E_total += turn_E
        P, E, L, g = P_next, E_next, L_next, g_next
        i += 1

    rec.install(trace)
    trace.capture_step = i if L <= D else None
    trace.total_steps = i
    trace.L_final = L
    trace.B_min = None if b_min is math.inf else b_min
    trace.worst_monotone = None if worst_mono == -math.inf else worst_mono
    return trace


def _run_runner_planar(domain, P, policy, D, max_steps, record_stride,
                       seed, tb_mode):
    """Tight loop for a straight-line evader in the plane.  Pure float math;
    the angle columns use the same local formulas as the generic engine."""
    rec = _Recorder(record_stride)
    trace = PursuitTrace(step_size=D, stride=rec.stride, curvature_bound=0.0,
                         domain=domain, policy_name=policy.name, seed=seed,
                         tie_break_mode=tb_mode)
    ex, ey = float(policy._pos[0]), float(policy._pos[1])
    ux, uy = float(policy.direction[0]), float(policy.direction[1])
    px, py = float(P[0]), float(P[1])
    p0x, p0y, e0x, e0y = px, py, ex, ey
    L = math.hypot(ex - px, ey - py)
    trace.L0 = L
    tau_P_lagged = 0.0
    c_P = c_E = 0.0
    worst_mono = -math.inf
    hx = hy = None  # previous pursuit heading
    i = 0
    while True:
        capture_now = L <= D
        stop_now = i >= max_steps
        keep = rec.want(i) or capture_now or stop_now
        if keep:
            rec.open_row(i, i * D, L, tau_P_lagged, 0.0, c_P, c_E,
                         math.hypot(px - p0x, py - p0y),
                         math.hypot(ex - e0x, ey - e0y),
                         np.array([px, py]), np.array([ex, ey]))
        if capture_now or stop_now:
            rec.flush()
            break
        gx, gy = (ex - px) / L, (ey - py) / L
        npx, npy = px + D * gx, py + D * gy
        nex, ney = ex + D * ux, ey + D * uy
        L_next = math.hypot(nex - npx, ney - npy)
        cross = gx * uy - gy * ux
        dot = gx * ux + gy * uy
        if hx is not None:
            turn = math.atan2(abs(hx * gy - hy * gx), hx * gx + hy * gy)
        else:
            turn = 0.0
        if keep and L_next > 0:
            vx, vy = (nex - npx) / L_next, (ney - npy) / L_next
            alpha = math.atan2(abs(gx * vy - gy * vx), gx * vx + gy * vy)
            a, b_side, c_side = D, L - D, L_next
            cos_at = (b_side * b_side + c_side * c_side - a * a) / (2 * b_side * c_side)
            alpha_tilde = math.acos(min(1.0, max(-1.0, cos_at)))
            rec.fill_angles(alpha=alpha, alpha_tilde=alpha_tilde,
                            beta=math.pi - alpha, phi=NAN, delta=NAN,
                            theta=math.pi if i else NAN, Delta=L - L_next)
        if keep:
            rec.flush()
        # turn is the heading change at vertex P_i, known exactly at step i,
        # so the running total needs no extra lag here
        tau_P_lagged += turn
        hx, hy = gx, gy
        worst_mono = max(worst_mono, L_next - L)
        px, py, ex, ey, L = npx, npy, nex, ney, L_next
        c_P = max(c_P, math.hypot(px - p0x, py - p0y))
        c_E = max(c_E, math.hypot(ex - e0x, ey - e0y))
        i += 1

    rec.install(trace)
    trace.capture_step = i if L <= D else None
    trace.total_steps = i
    trace.L_final = L
    trace.worst_monotone = None if worst_mono == -math.inf else worst_mono
    policy._pos = np.array([ex, ey])
    return trace


# ---------------------------------------------------------------------------
# Dyadic refinement


@dataclass
class DyadicReport:
    m_values: list
    traces: list
    sup_gaps: list          # sup distance between consecutive pursuit curves
    horizon: float
    rounded: bool
    min_separations: list
    captures: list


def _interp_pursuer(domain, trace, t):
    """Pursuer position at time t, interpolated along its geodesic segments."""
    D = trace.step_size
    i = int(t / D + 1e-9)
    i = min(i, len(trace.P_points) - 1)
    s = t - i * D
    if s <= GEOM_TOL or i + 1 >= len(trace.P_points):
        return trace.P_points[i]
    seg = domain.shortest_path(trace.P_points[i], trace.P_points[i + 1],
                               TieBreak.upper())
    return seg.point_at(min(s, seg.length))


def run_dyadic(domain, pursuer_start, evader_track, m_min, m_max, horizon,
               tie_break=None, allow_long_start=False):
    """Run the game with step sizes 2^-m for m in [m_min, m_max] against a
    prescribed evader track and report consecutive sup-distances."""
    if m_min > m_max:
        raise ConfigurationError("m_min must not exceed m_max")
    if horizon <= 0:
        raise ConfigurationError("horizon must be positive")
    d_coarse = 2.0 ** (-m_min)
    n_coarse = int(math.floor(horizon / d_coarse + 1e-9))
    if n_coarse < 1:
        raise ConfigurationError("horizon shorter than the coarsest step")
    T = n_coarse * d_coarse
    rounded = abs(T - horizon) > 1e-12
    m_values = list(range(m_min, m_max + 1))
    traces = []
    for m in m_values:
        D = 2.0 ** (-m)
        steps = int(round(T / D))
        policy = PrescribedCurve(evader_track)
        tb = tie_break if tie_break is not None else TieBreak.upper()
        traces.append(run_discrete(domain, pursuer_start, policy, D, steps,
                                   tie_break=tb, record_stride=1,
                                   allow_long_start=allow_long_start))
    sup_gaps = []
    for a, b in zip(traces, traces[1:]):
        t_end = min(a.t[-1], b.t[-1])
        fine = b.step_size
        n = int(t_end / fine + 1e-9)
        gap = 0.0
        for k in range(n + 1):
            t = k * fine
            pa = _interp_pursuer(domain, a, t)
            pb = _interp_pursuer(domain, b, t)
            gap = max(gap, domain.distance(pa, pb))
        sup_gaps.append(gap)
    return DyadicReport(
        m_values=m_values,
        traces=traces,
        sup_gaps=sup_gaps,
        horizon=T,
        rounded=rounded,
        min_separations=[float(np.min(tr.L)) for tr in traces],
        captures=[tr.capture_step for tr in traces],
    )
