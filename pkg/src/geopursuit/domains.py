"""Playing-field domains: points, exact distances, geodesics, directions, angles.

Conventions
-----------
* Planar domains use numpy arrays of shape (2,) as points; the sphere uses
  shape (3,) vectors of norm R; metric trees use ``TreePoint(edge, offset)``.
* A geodesic is an ordered list of primitive pieces (straight lines, circular
  arcs, tree segments) whose endpoints chain together.  Piece arithmetic is
  exact: arc lengths come from radii and sweeps, never from sampling.
* Directions are unit vectors for embedded domains and ``(edge, sign)`` pairs
  for trees.  ``direction_at(path, end)`` returns the travel direction at the
  requested end of the path.
* Non-unique shortest paths are resolved by an explicit :class:`TieBreak`.
  "upper" means the candidate bulging left of the directed start-to-end chord
  (for sphere antipodes, a fixed canonical plane); "alternate" flips the
  choice on every resolution, which adversarial boundary-oscillation
  scenarios require; "forbid" raises :class:`AmbiguityError`.
"""

import heapq
import math
from bisect import bisect_right
from collections import namedtuple

import numpy as np

from . import geometry as geo
from .errors import (
    AmbiguityError,
    ConfigurationError,
    DegenerateError,
    InvalidDomainError,
    InvalidPointError,
    RangeError,
)
from .tolerances import GEOM_TOL, POINT_TOL


# ---------------------------------------------------------------------------
# Tie-breaking


class TieBreak:
    """Policy for resolving non-unique shortest paths."""

    FORBID = "forbid"
    UPPER = "upper"
    LOWER = "lower"
    ALTERNATE = "alternate"
    MODES = (FORBID, UPPER, LOWER, ALTERNATE)

    def __init__(self, mode=FORBID, counter=0):
        if mode not in self.MODES:
            raise ConfigurationError("unknown tie-break mode %r" % (mode,))
        self.mode = mode
        self.counter = int(counter)

    @classmethod
    def forbid(cls):
        return cls(cls.FORBID)

    @classmethod
    def upper(cls):
        return cls(cls.UPPER)

    @classmethod
    def lower(cls):
        return cls(cls.LOWER)

    @classmethod
    def alternate(cls, counter=0):
        return cls(cls.ALTERNATE, counter)

    def resolve(self, scored, what="geodesic"):
        """Pick one of several tied candidates.

        ``scored`` is a list of ``(score, key, payload)`` where score is the
        left-of-chord measure and key is a deterministic tiebreaker for equal
        scores.  A single candidate is returned unconditionally.
        """
        if not scored:
            raise DegenerateError("no candidates to resolve")
        if len(scored) == 1:
            return scored[0][2]
        if self.mode == self.FORBID:
            raise AmbiguityError(
                "%d %ss tie and tie-break is 'forbid'" % (len(scored), what),
                candidates=[s[2] for s in scored],
            )
        if self.mode == self.ALTERNATE:
            pick_upper = self.counter % 2 == 0
            self.counter += 1
        else:
            pick_upper = self.mode == self.UPPER
        ordered = sorted(scored, key=lambda s: (s[0], s[1]))
        return ordered[-1][2] if pick_upper else ordered[0][2]


# ---------------------------------------------------------------------------
# Geodesic pieces


class LinePiece:
    """Straight segment between two points of an embedded domain."""

    __slots__ = ("start", "end", "length")

    def __init__(self, start, end):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self.length = geo.norm(self.end - self.start)

    def point_at(self, s):
        if self.length == 0.0:
            return self.start.copy()
        t = s / self.length
        return self.start + t * (self.end - self.start)

    def travel_direction(self, s):
        return geo.unit(self.end - self.start)

    def reversed(self):
        return LinePiece(self.end, self.start)

    def __repr__(self):
        return "Line(%s -> %s)" % (self.start.tolist(), self.end.tolist())


class ArcPiece:
    """Circular arc, planar by default.

    ``point(a) = center + radius*(cos a * u + sin a * w)`` where the frame
    (u, w) defaults to the planar axes.  A nonzero frame puts the arc on a
    great circle of a sphere about ``center``.  ``sweep`` is signed: positive
    is counterclockwise in the frame.
    """

    __slots__ = ("center", "radius", "start_angle", "sweep", "frame")

    def __init__(self, center, radius, start_angle, sweep, frame=None):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.start_angle = float(start_angle)
        self.sweep = float(sweep)
        self.frame = None
        if frame is not None:
            u, w = frame
            self.frame = (np.asarray(u, dtype=float), np.asarray(w, dtype=float))

    @property
    def end_angle(self):
        return self.start_angle + self.sweep

    @property
    def orientation(self):
        return 1 if self.sweep >= 0 else -1

    @property
    def length(self):
        return self.radius * abs(self.sweep)

    def _basis(self):
        if self.frame is not None:
            return self.frame
        return (np.array([1.0, 0.0]), np.array([0.0, 1.0]))

    def angle_at(self, s):
        if self.radius == 0.0:
            return self.start_angle
        return self.start_angle + self.orientation * (s / self.radius)

    def point_at(self, s):
        a = self.angle_at(s)
        if self.frame is None:
            return np.array([self.center[0] + self.radius * math.cos(a),
                             self.center[1] + self.radius * math.sin(a)])
        u, w = self.frame
        return self.center + self.radius * (math.cos(a) * u + math.sin(a) * w)

    def travel_direction(self, s):
        u, w = self._basis()
        a = self.angle_at(s)
        tangent = -math.sin(a) * u + math.cos(a) * w
        return float(self.orientation) * tangent

    def reversed(self):
        return ArcPiece(self.center, self.radius, self.end_angle, -self.sweep, self.frame)

    @property
    def start(self):
        return self.point_at(0.0)

    @property
    def end(self):
        return self.point_at(self.length)

    def __repr__(self):
        return "Arc(c=%s r=%.6g a=%.6g sweep=%.6g)" % (
            self.center.tolist(), self.radius, self.start_angle, self.sweep)


class TreePiece:
    """Portion of a single tree edge, from one offset to another."""

    __slots__ = ("edge", "o_from", "o_to")

    def __init__(self, edge, o_from, o_to):
        self.edge = int(edge)
        self.o_from = float(o_from)
        self.o_to = float(o_to)

    @property
    def length(self):
        return abs(self.o_to - self.o_from)

    @property
    def sign(self):
        return 1 if self.o_to >= self.o_from else -1

    @property
    def start(self):
        return TreePoint(self.edge, self.o_from)

    @property
    def end(self):
        return TreePoint(self.edge, self.o_to)

    def point_at(self, s):
        return TreePoint(self.edge, self.o_from + self.sign * s)

    def travel_direction(self, s):
        return (self.edge, self.sign)

    def reversed(self):
        return TreePiece(self.edge, self.o_to, self.o_from)

    def __repr__(self):
        return "TreeSeg(e%d %.6g -> %.6g)" % (self.edge, self.o_from, self.o_to)


class GeodesicPath:
    """A geodesic (or local geodesic) as a chain of primitive pieces."""

    def __init__(self, domain, pieces):
        self.domain = domain
        self.pieces = list(pieces)
        lengths = [p.length for p in self.pieces]
        self._cum = [0.0]
        for ln in lengths:
            self._cum.append(self._cum[-1] + ln)
        self.length = self._cum[-1]

    @property
    def start(self):
        return self.pieces[0].start

    @property
    def end(self):
        return self.pieces[-1].end

    def _locate(self, s):
        if s < -GEOM_TOL or s > self.length + GEOM_TOL:
            raise RangeError("arclength %r outside [0, %r]" % (s, self.length))
        s = min(max(s, 0.0), self.length)
        i = bisect_right(self._cum, s) - 1
        if i >= len(self.pieces):
            i = len(self.pieces) - 1
        return i, s - self._cum[i]

    def point_at(self, s):
        i, local = self._locate(s)
        return self.pieces[i].point_at(local)

    def travel_direction_at(self, s):
        """Forward travel direction at arclength s (next piece at junctions)."""
        i, local = self._locate(s)
        if local >= self.pieces[i].length and i + 1 < len(self.pieces):
            i, local = i + 1, 0.0
        return self.pieces[i].travel_direction(local)

    def direction(self, end="start"):
        if self.length <= 0.0:
            raise DegenerateError("zero-length path has no direction")
        if end == "start":
            for p in self.pieces:
                if p.length > 0.0:
                    return p.travel_direction(0.0)
        elif end == "finish":
            for p in reversed(self.pieces):
                if p.length > 0.0:
                    return p.travel_direction(p.length)
        else:
            raise ConfigurationError("end must be 'start' or 'finish'")
        raise DegenerateError("zero-length path has no direction")

    def reversed(self):
        return GeodesicPath(self.domain, [p.reversed() for p in reversed(self.pieces)])

    def check_invariants(self, tol=GEOM_TOL):
        """Verify chaining, tangency at line/arc junctions, and length bookkeeping.

        Returns the worst residual found (max of endpoint gaps and junction
        turn angles); raises nothing so tests can assert on the value.
        """
        worst = 0.0
        total = 0.0
        for p in self.pieces:
            total += p.length
        worst = max(worst, abs(total - self.length))
        for a, b in zip(self.pieces, self.pieces[1:]):
            ea, sb = a.end, b.start
            if isinstance(ea, TreePoint) or isinstance(sb, TreePoint):
                gap = self.domain.distance(ea, sb)
            else:
                gap = geo.norm(np.asarray(ea) - np.asarray(sb))
            worst = max(worst, gap)
            if a.length > 0.0 and b.length > 0.0 and not isinstance(a, TreePiece):
                da = a.travel_direction(a.length)
                db = b.travel_direction(0.0)
                worst = max(worst, geo.angle_between(da, db))
        if isinstance(self.domain, PlaneMinusDisks):
            for p in self.pieces:
                if isinstance(p, ArcPiece):
                    ok = any(
                        geo.norm(p.center - c) <= tol and abs(p.radius - r) <= tol
                        for c, r in self.domain.disks
                    )
                    if not ok:
                        worst = max(worst, math.inf)
        return worst


# ---------------------------------------------------------------------------
# Domain base


class Domain:
    """Common interface for all playing fields.

    Instances are immutable after construction and safe to share across
    concurrent readers; every operation is a pure function of its inputs.
    """

    kind = "abstract"
    planar = False

    def __init__(self, curvature_bound, compact):
        self.curvature_bound = float(curvature_bound)
        self.compact = bool(compact)

    @property
    def threshold(self):
        """Uniqueness threshold pi/sqrt(K); infinite for K <= 0."""
        if self.curvature_bound <= 0.0:
            return math.inf
        return math.pi / math.sqrt(self.curvature_bound)

    # -- overridables -------------------------------------------------------

    def validate_point(self, p):
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def shortest_path(self, p, q, tie_break=None):
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    def angle_between_directions(self, at_point, d1, d2):
        return geo.angle_between(d1, d2)

    def reverse_direction(self, at_point, d):
        return -np.asarray(d, dtype=float)

    def radial_distance(self, p, q):
        """Distance used for containment balls (circumradius, r(t) series).

        Embedded planar domains override this with the ambient planar
        distance; elsewhere it is the intrinsic distance.
        """
        return self.distance(p, q)

    # -- shared operations ---------------------------------------------------

    def point_along(self, path, s):
        """Point at arclength s along a geodesic path."""
        if s < -GEOM_TOL or s > path.length + GEOM_TOL:
            raise RangeError("arclength %r outside [0, %r]" % (s, path.length))
        return path.point_at(min(max(s, 0.0), path.length))

    def direction_at(self, path, end="start"):
        if path.length <= 0.0:
            raise DegenerateError("zero-length path has no direction")
        return path.direction(end)

    def angle_at(self, p, q, r, tie_break=None):
        """Angle at p between the geodesics toward q and toward r."""
        p = self.validate_point(p)
        q = self.validate_point(q)
        r = self.validate_point(r)
        gq = self.shortest_path(p, q, tie_break)
        gr = self.shortest_path(p, r, tie_break)
        if gq.length <= 0.0 or gr.length <= 0.0:
            raise DegenerateError("angle_at needs q != p and r != p")
        return self.angle_between_directions(
            p, gq.direction("start"), gr.direction("start"))

    def describe(self):
        return {"kind": self.kind}


# ---------------------------------------------------------------------------
# Euclidean space


class EuclideanSpace(Domain):
    kind = "euclidean"

    def __init__(self, dim=2):
        dim = int(dim)
        if dim < 1:
            raise InvalidDomainError("dimension must be a positive integer")
        super().__init__(curvature_bound=0.0, compact=False)
        self.dim = dim
        self.planar = dim == 2

    def validate_point(self, p):
        a = geo.as_vec(p, self.dim)
        if not np.all(np.isfinite(a)):
            raise InvalidPointError("non-finite coordinates %r" % (p,))
        return a

    def distance(self, p, q):
        return geo.norm(self.validate_point(p) - self.validate_point(q))

    def shortest_path(self, p, q, tie_break=None):
        return GeodesicPath(self, [LinePiece(self.validate_point(p), self.validate_point(q))])

    def random_point(self, rng, scale=5.0):
        return np.array([rng.uniform(-scale, scale) for _ in range(self.dim)])

    def describe(self):
        return {"kind": self.kind, "dim": self.dim}


# ---------------------------------------------------------------------------
# Convex planar region


class ConvexPlanarRegion(Domain):
    """Compact convex subset of the plane; geodesics are straight chords."""

    kind = "convex_region"
    planar = True

    def __init__(self, disk_radius=None, polygon=None, center=(0.0, 0.0)):
        super().__init__(curvature_bound=0.0, compact=True)
        if (disk_radius is None) == (polygon is None):
            raise InvalidDomainError("give exactly one of disk_radius or polygon")
        self.center = np.asarray(center, dtype=float)
        self.disk_radius = None
        self.polygon = None
        if disk_radius is not None:
            if disk_radius <= 0:
                raise InvalidDomainError("disk radius must be positive")
            self.disk_radius = float(disk_radius)
        else:
            pts = np.asarray(polygon, dtype=float)
            if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
                raise InvalidDomainError("polygon needs at least 3 planar vertices")
            crosses = []
            n = pts.shape[0]
            for i in range(n):
                a, b, c = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
                u, v = b - a, c - b
                crosses.append(float(u[0] * v[1] - u[1] * v[0]))
            if all(c >= -GEOM_TOL for c in crosses):
                pass
            elif all(c <= GEOM_TOL for c in crosses):
                pts = pts[::-1].copy()
            else:
                raise InvalidDomainError("polygon vertices are not convex")
            self.polygon = pts

    def validate_point(self, p):
        a = geo.as_vec(p, 2)
        if self.disk_radius is not None:
            if geo.norm(a - self.center) > self.disk_radius + POINT_TOL:
                raise InvalidPointError(
                    "point %s outside the disk of radius %g" % (a.tolist(), self.disk_radius))
            return a
        n = self.polygon.shape[0]
        for i in range(n):
            u, v = self.polygon[i], self.polygon[(i + 1) % n]
            edge = v - u
            rel = a - u
            if edge[0] * rel[1] - edge[1] * rel[0] < -POINT_TOL * (1.0 + geo.norm(edge)):
                raise InvalidPointError(
                    "point %s outside polygon edge %d" % (a.tolist(), i))
        return a

    def distance(self, p, q):
        return geo.norm(self.validate_point(p) - self.validate_point(q))

    def shortest_path(self, p, q, tie_break=None):
        return GeodesicPath(self, [LinePiece(self.validate_point(p), self.validate_point(q))])

    def random_point(self, rng):
        if self.disk_radius is not None:
            while True:
                a = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1)]) * self.disk_radius
                if geo.norm(a) <= self.disk_radius:
                    return self.center + a
        lo = self.polygon.min(axis=0)
        hi = self.polygon.max(axis=0)
        while True:
            a = np.array([rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])])
            try:
                return self.validate_point(a)
            except InvalidPointError:
                continue

    def describe(self):
        d = {"kind": self.kind}
        if self.disk_radius is not None:
            d["disk_radius"] = self.disk_radius
            d["center"] = self.center.tolist()
        else:
            d["polygon"] = self.polygon.tolist()
        return d


# ---------------------------------------------------------------------------
# Round sphere


class SphereDomain(Domain):
    """Round 2-sphere of radius R in 3-space; curvature bound 1/R^2."""

    kind = "sphere"

    def __init__(self, radius=1.0):
        radius = float(radius)
        if radius <= 0:
            raise InvalidDomainError("sphere radius must be positive")
        super().__init__(curvature_bound=1.0 / radius**2, compact=True)
        self.radius = radius

    def validate_point(self, p):
        a = geo.as_vec(p, 3)
        if abs(geo.norm(a) - self.radius) > POINT_TOL * max(1.0, self.radius):
            raise InvalidPointError(
                "point norm %r is not the sphere radius %r" % (geo.norm(a), self.radius))
        return a

    def distance(self, p, q):
        u = self.validate_point(p) / self.radius
        v = self.validate_point(q) / self.radius
        return self.radius * math.atan2(geo.norm(np.cross(u, v)), float(np.dot(u, v)))

    def _canonical_perp(self, u):
        best = None
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            w = e - float(np.dot(e, u)) * u
            n = geo.norm(w)
            if best is None or n > best[0]:
                best = (n, w / n)
        return best[1]

    @staticmethod
    def _axis_score(w):
        for k in (2, 1, 0):
            if abs(w[k]) > 1e-9:
                return float(w[k])
        return 0.0

    def shortest_path(self, p, q, tie_break=None):
        p = self.validate_point(p)
        q = self.validate_point(q)
        u = p / self.radius
        v = q / self.radius
        theta = math.atan2(geo.norm(np.cross(u, v)), float(np.dot(u, v)))
        if theta <= 0.0:
            return GeodesicPath(self, [ArcPiece(np.zeros(3), self.radius, 0.0, 0.0, (u, self._canonical_perp(u)))])
        if math.pi - theta <= 1e-12:
            w0 = self._canonical_perp(u)
            tb = tie_break if tie_break is not None else TieBreak.forbid()
            cands = []
            for w in (w0, -w0):
                arc = ArcPiece(np.zeros(3), self.radius, 0.0, math.pi, (u, w))
                cands.append((self._axis_score(w), tuple(np.round(w, 9)), arc))
            arc = tb.resolve(cands, what="antipodal great semicircle")
            return GeodesicPath(self, [arc])
        w = v - math.cos(theta) * u
        w = w / geo.norm(w)
        return GeodesicPath(self, [ArcPiece(np.zeros(3), self.radius, 0.0, theta, (u, w))])

    def angle_between_directions(self, at_point, d1, d2):
        return geo.angle_between(d1, d2)

    def random_point(self, rng):
        while True:
            a = np.array([rng.gauss(0, 1) for _ in range(3)])
            n = geo.norm(a)
            if n > 1e-6:
                return a / n * self.radius

    def describe(self):
        return {"kind": self.kind, "radius": self.radius}


# ---------------------------------------------------------------------------
# Plane with removed disks


class PlaneMinusDisks(Domain):
    """The plane with disjoint open disks removed, carrying the length metric.

    All removed radii are required to be >= 1, which makes the domain a
    curvature-bound-1 space; the declared bound is therefore K = 1 and the
    uniqueness threshold pi.  Geodesics are found on a tangent-visibility
    graph: tangent lines from the endpoints, bitangents between circles, and
    boundary arcs between contact points.  Distances use exact segment and
    arc lengths, never discretization.
    """

    kind = "plane_minus_disks"
    planar = True

    def __init__(self, disks, min_radius_check=True):
        super().__init__(curvature_bound=1.0, compact=False)
        parsed = []
        for i, (center, radius) in enumerate(disks):
            c = geo.as_vec(center, 2)
            r = float(radius)
            if r <= 0:
                raise InvalidDomainError("disk %d has nonpositive radius" % i)
            if min_radius_check and r < 1.0:
                raise InvalidDomainError(
                    "disk %d radius %g violates the minimum radius 1" % (i, r))
            parsed.append((c, r))
        for i in range(len(parsed)):
            for j in range(i + 1, len(parsed)):
                ci, ri = parsed[i]
                cj, rj = parsed[j]
                if geo.norm(ci - cj) <= ri + rj:
                    raise InvalidDomainError(
                        "disks %d and %d are not disjoint" % (i, j))
        if not parsed:
            raise InvalidDomainError("need at least one removed disk")
        self.disks = parsed

    def validate_point(self, p):
        a = geo.as_vec(p, 2)
        for i, (c, r) in enumerate(self.disks):
            if geo.norm(a - c) < r - POINT_TOL:
                raise InvalidPointError(
                    "point %s lies inside removed disk %d (center %s, radius %g)"
                    % (a.tolist(), i, c.tolist(), r))
        return a

    def radial_distance(self, p, q):
        # Containment balls for embedded planar domains are planar balls.
        # Hot path; assumes in-domain points (callers validate positions).
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def _segment_clear(self, a, b):
        return all(
            geo.segment_clears_disk(a, b, c, r, GEOM_TOL) for c, r in self.disks)

    def _circle_of(self, p):
        for i, (c, r) in enumerate(self.disks):
            if abs(geo.norm(p - c) - r) <= GEOM_TOL:
                return i
        return None

    def _build_graph(self, p, q):
        """Tangent-visibility graph: nodes [(point, circle, angle)], edge list."""
        nodes = []

        def add_node(pt, circle, angle):
            if circle is not None:
                for k, (p2, c2, a2) in enumerate(nodes):
                    if c2 == circle and abs(
                            (angle - a2 + math.pi) % geo.TWO_PI - math.pi) <= 1e-12:
                        return k
            nodes.append((np.asarray(pt, dtype=float), circle, angle))
            return len(nodes) - 1

        for t in (p, q):
            ci = self._circle_of(t)
            ang = None
            if ci is not None:
                ang = geo.azimuth(t - self.disks[ci][0])
            nodes.append((np.asarray(t, dtype=float), ci, ang))

        terminal_ids = (0, 1)
        edges = []

        def add_seg_edge(ia, ib):
            a, b = nodes[ia][0], nodes[ib][0]
            ln = geo.norm(b - a)
            if ln <= 0.0:
                return
            if self._segment_clear(a, b):
                edges.append((ia, ib, ln, "seg", None))

        # direct segment between the terminals
        add_seg_edge(0, 1)

        # tangent lines from each terminal to each circle it is not on
        for ti in terminal_ids:
            tpt, tcirc, _ = nodes[ti]
            for i, (c, r) in enumerate(self.disks):
                if tcirc == i:
                    continue
                d = geo.norm(tpt - c)
                if d <= r + GEOM_TOL:
                    continue
                for ang in geo.tangent_touch_angles(tpt, c, r):
                    tid = add_node(c + r * geo.e_vec(ang), i, ang)
                    add_seg_edge(ti, tid)

        # bitangents between circle pairs
        for i in range(len(self.disks)):
            for j in range(i + 1, len(self.disks)):
                ci, ri = self.disks[i]
                cj, rj = self.disks[j]
                for a1, a2, _kind in geo.bitangent_specs(ci, ri, cj, rj):
                    n1 = add_node(ci + ri * geo.e_vec(a1), i, a1)
                    n2 = add_node(cj + rj * geo.e_vec(a2), j, a2)
                    add_seg_edge(n1, n2)

        # boundary arcs between angularly adjacent nodes on each circle
        for i, (c, r) in enumerate(self.disks):
            members = [(a % geo.TWO_PI, k) for k, (_, ci2, a) in enumerate(nodes)
                       if ci2 == i and a is not None]
            members.sort()
            m = len(members)
            if m < 2:
                continue
            for idx in range(m):
                a_ang, a_id = members[idx]
                b_ang, b_id = members[(idx + 1) % m]
                gap = geo.ccw_gap(a_ang, b_ang) if m > 1 else geo.TWO_PI
                if m == 2 and idx == 1:
                    gap = geo.ccw_gap(a_ang, b_ang)
                if gap <= 0.0:
                    gap = geo.TWO_PI if m == 1 else gap
                edges.append((a_id, b_id, r * gap, "arc", (i, a_ang, a_ang + gap)))

        return nodes, edges

    def _dijkstra(self, nodes, edges):
        n = len(nodes)
        adj = [[] for _ in range(n)]
        for eid, (u, v, w, kind, payload) in enumerate(edges):
            adj[u].append((v, w, eid))
            adj[v].append((u, w, eid))
        dist = [math.inf] * n
        preds = [[] for _ in range(n)]
        dist[0] = 0.0
        heap = [(0.0, 0)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u] + 1e-12:
                continue
            for v, w, eid in adj[u]:
                nd = d + w
                if nd < dist[v] - 1e-12:
                    dist[v] = nd
                    preds[v] = [(u, eid)]
                    heapq.heappush(heap, (nd, v))
                elif nd <= dist[v] + GEOM_TOL and (u, eid) not in preds[v]:
                    preds[v].append((u, eid))
        return dist, preds

    def _enumerate_paths(self, preds, target, cap=32):
        paths = []

        def walk(node, acc_nodes, acc_edges, seen):
            if len(paths) >= cap:
                return
            if node == 0:
                paths.append((list(reversed(acc_nodes + [0])),
                              list(reversed(acc_edges))))
                return
            for u, eid in preds[node]:
                if u in seen:
                    continue
                walk(u, acc_nodes + [node], acc_edges + [eid], seen | {u})

        walk(target, [], [], {target})
        return paths

    def _path_pieces(self, nodes, edges, node_seq, edge_seq):
        pieces = []
        for k, eid in enumerate(edge_seq):
            u, v = node_seq[k], node_seq[k + 1]
            eu, ev, w, kind, payload = edges[eid]
            if kind == "seg":
                pieces.append(("seg", nodes[u][0], nodes[v][0]))
            else:
                circle, a_from, a_to = payload
                c, r = self.disks[circle]
                if u == eu:
                    start, sweep = a_from, a_to - a_from
                else:
                    start, sweep = a_to, a_from - a_to
                pieces.append(("arc", circle, start, sweep))
        merged = []
        for pc in pieces:
            if (merged and pc[0] == "arc" and merged[-1][0] == "arc"
                    and merged[-1][1] == pc[1]
                    and merged[-1][3] * pc[3] >= 0.0):
                prev = merged.pop()
                merged.append(("arc", pc[1], prev[2], prev[3] + pc[3]))
            else:
                merged.append(pc)
        out = []
        for pc in merged:
            if pc[0] == "seg":
                out.append(LinePiece(pc[1], pc[2]))
            else:
                c, r = self.disks[pc[1]]
                out.append(ArcPiece(c, r, pc[2], pc[3]))
        return out

    def _sample_pieces(self, pieces, per_arc=9):
        pts = []
        for pc in pieces:
            if isinstance(pc, LinePiece):
                pts.append(pc.start)
            else:
                n = max(2, per_arc)
                for k in range(n):
                    pts.append(pc.point_at(pc.length * k / (n - 1)))
        pts.append(pieces[-1].end)
        return np.asarray(pts)

    def _solve(self, p, q):
        nodes, edges = self._build_graph(p, q)
        dist, preds = self._dijkstra(nodes, edges)
        if not math.isfinite(dist[1]):
            raise InvalidDomainError("no path between the given points")
        return nodes, edges, dist, preds

    def _same_circle_arcs(self, p, q):
        """Both arc candidates when p and q sit on one boundary circle.

        The straight chord always dips into the open disk and any detour off
        the circle is at least as long, so the geodesic is the shorter arc
        (both arcs tie at antipodal points).
        """
        ci = self._circle_of(p)
        if ci is None or ci != self._circle_of(q):
            return None
        c, r = self.disks[ci]
        ap = geo.azimuth(p - c)
        gap = geo.ccw_gap(ap, geo.azimuth(q - c))
        if gap == 0.0:
            return None
        ccw = ArcPiece(c, r, ap, gap)
        cw = ArcPiece(c, r, ap, gap - geo.TWO_PI)
        return [ccw, cw]

    def distance(self, p, q):
        p = self.validate_point(p)
        q = self.validate_point(q)
        if geo.norm(p - q) == 0.0:
            return 0.0
        arcs = self._same_circle_arcs(p, q)
        if arcs is not None:
            return min(a.length for a in arcs)
        _, _, dist, _ = self._solve(p, q)
        return dist[1]

    def shortest_path(self, p, q, tie_break=None):
        p = self.validate_point(p)
        q = self.validate_point(q)
        tb = tie_break if tie_break is not None else TieBreak.forbid()
        if geo.norm(p - q) == 0.0:
            return GeodesicPath(self, [LinePiece(p, q)])
        arcs = self._same_circle_arcs(p, q)
        if arcs is not None:
            best = min(a.length for a in arcs)
            live = [a for a in arcs if a.length <= best + GEOM_TOL]
            if len(live) == 1:
                return GeodesicPath(self, [live[0]])
            cands = [(geo.left_of_chord_score(self._sample_pieces([a])),
                      (round(a.sweep, 12),), [a]) for a in live]
            return GeodesicPath(self, tb.resolve(cands, what="shortest path"))
        nodes, edges, dist, preds = self._solve(p, q)
        raw = self._enumerate_paths(preds, 1)
        best = dist[1]
        candidates = []
        seen_seqs = set()
        for node_seq, edge_seq in raw:
            ln = sum(edges[e][2] for e in edge_seq)
            if ln > best + GEOM_TOL:
                continue
            key = (tuple(node_seq), tuple(edge_seq))
            if key in seen_seqs:
                continue
            seen_seqs.add(key)
            pieces = self._path_pieces(nodes, edges, node_seq, edge_seq)
            score = geo.left_of_chord_score(self._sample_pieces(pieces))
            candidates.append((score, key, pieces))
        pieces = tb.resolve(candidates, what="shortest path")
        return GeodesicPath(self, pieces)

    def random_point(self, rng, margin=3.0):
        lo = np.min([c - r - margin for c, r in self.disks], axis=0)
        hi = np.max([c + r + margin for c, r in self.disks], axis=0)
        while True:
            a = np.array([rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])])
            try:
                return self.validate_point(a)
            except InvalidPointError:
                continue

    def describe(self):
        return {
            "kind": self.kind,
            "disks": [{"center": c.tolist(), "radius": r} for c, r in self.disks],
        }


# ---------------------------------------------------------------------------
# Metric tree


TreePoint = namedtuple("TreePoint", ["edge", "offset"])


class MetricTree(Domain):
    """Finite metric tree: vertices joined by edges of positive length.

    Points are ``TreePoint(edge, offset)`` with offset measured from the
    edge's first endpoint.  Vertex locations are canonicalized to the lowest
    incident edge id.  Directions are ``(edge, sign)`` pairs; the angle
    between distinct directions at a point is pi.
    """

    kind = "metric_tree"

    def __init__(self, edges):
        super().__init__(curvature_bound=0.0, compact=True)
        if not edges:
            raise InvalidDomainError("tree needs at least one edge")
        self.edge_u = []
        self.edge_v = []
        self.edge_len = []
        self.vertices = []
        index = {}
        adj = {}
        for u, v, ln in edges:
            ln = float(ln)
            if ln <= 0:
                raise InvalidDomainError("edge (%r, %r) has nonpositive length" % (u, v))
            for lbl in (u, v):
                if lbl not in index:
                    index[lbl] = len(self.vertices)
                    self.vertices.append(lbl)
                    adj[index[lbl]] = []
            iu, iv = index[u], index[v]
            eid = len(self.edge_u)
            self.edge_u.append(iu)
            self.edge_v.append(iv)
            self.edge_len.append(ln)
            adj[iu].append((eid, iv))
            adj[iv].append((eid, iu))
        self.adj = adj
        nv, ne = len(self.vertices), len(self.edge_u)
        if ne != nv - 1:
            raise InvalidDomainError(
                "%d edges on %d vertices cannot be a tree" % (ne, nv))
        # BFS from vertex 0 checks connectivity and seeds distance tables.
        self._vdist = [[math.inf] * nv for _ in range(nv)]
        self._vnext = [[None] * nv for _ in range(nv)]
        for s in range(nv):
            self._vdist[s][s] = 0.0
            stack = [(s, None)]
            while stack:
                x, parent = stack.pop()
                for eid, y in self.adj[x]:
                    if y == parent:
                        continue
                    self._vdist[s][y] = self._vdist[s][x] + self.edge_len[eid]
                    self._vnext[s][y] = self._vnext[s][x] if x != s else (eid, y)
                    stack.append((y, x))
        if any(math.isinf(d) for d in self._vdist[0]):
            raise InvalidDomainError("tree edges are not connected")
        self._min_edge_at = {}
        for w in range(nv):
            self._min_edge_at[w] = min(e for e, _ in self.adj[w])

    # -- point helpers -------------------------------------------------------

    def vertex_point(self, label):
        w = self.vertices.index(label)
        return self._vertex_tp(w)

    def _vertex_tp(self, w):
        e = self._min_edge_at[w]
        off = 0.0 if self.edge_u[e] == w else self.edge_len[e]
        return TreePoint(e, off)

    def validate_point(self, p):
        if not isinstance(p, TreePoint):
            try:
                p = TreePoint(int(p[0]), float(p[1]))
            except Exception:
                raise InvalidPointError("tree points are (edge, offset) pairs, got %r" % (p,))
        e, off = p.edge, float(p.offset)
        if e < 0 or e >= len(self.edge_u):
            raise InvalidPointError("edge id %r out of range" % (e,))
        ln = self.edge_len[e]
        if off < -POINT_TOL or off > ln + POINT_TOL:
            raise InvalidPointError(
                "offset %r outside edge %d of length %g" % (off, e, ln))
        off = min(max(off, 0.0), ln)
        if off <= POINT_TOL:
            return self._vertex_tp(self.edge_u[e])
        if off >= ln - POINT_TOL:
            return self._vertex_tp(self.edge_v[e])
        return TreePoint(e, off)

    def _vertex_index(self, p):
        """Vertex index when p sits at a vertex, else None."""
        if p.offset <= POINT_TOL:
            return self.edge_u[p.edge]
        if p.offset >= self.edge_len[p.edge] - POINT_TOL:
            return self.edge_v[p.edge]
        return None

    # -- metric ---------------------------------------------------------------

    def _end_offsets(self, p):
        """[(vertex, along-edge distance to it)] for both ends of p's edge."""
        e = p.edge
        return [(self.edge_u[e], p.offset),
                (self.edge_v[e], self.edge_len[e] - p.offset)]

    def distance(self, p, q):
        p = self.validate_point(p)
        q = self.validate_point(q)
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        best = math.inf
        for a, da in self._end_offsets(p):
            for b, db in self._end_offsets(q):
                best = min(best, da + self._vdist[a][b] + db)
        return best

    def shortest_path(self, p, q, tie_break=None):
        p = self.validate_point(p)
        q = self.validate_point(q)
        if p.edge == q.edge:
            return GeodesicPath(self, [TreePiece(p.edge, p.offset, q.offset)])
        best = None
        for a, da in self._end_offsets(p):
            for b, db in self._end_offsets(q):
                total = da + self._vdist[a][b] + db
                if best is None or total < best[0] - 1e-15:
                    best = (total, a, b)
        _, a, b = best
        pieces = []
        exit_off = 0.0 if self.edge_u[p.edge] == a else self.edge_len[p.edge]
        if abs(p.offset - exit_off) > 0.0:
            pieces.append(TreePiece(p.edge, p.offset, exit_off))
        x = a
        while x != b:
            eid, y = self._vnext[x][b]
            if self.edge_u[eid] == x:
                pieces.append(TreePiece(eid, 0.0, self.edge_len[eid]))
            else:
                pieces.append(TreePiece(eid, self.edge_len[eid], 0.0))
            x = y
        enter_off = 0.0 if self.edge_u[q.edge] == b else self.edge_len[q.edge]
        if abs(q.offset - enter_off) > 0.0:
            pieces.append(TreePiece(q.edge, enter_off, q.offset))
        if not pieces:
            pieces = [TreePiece(p.edge, p.offset, p.offset)]
        return GeodesicPath(self, pieces)

    # -- directions -----------------------------------------------------------

    def angle_between_directions(self, at_point, d1, d2):
        return 0.0 if d1 == d2 else math.pi

    def reverse_direction(self, at_point, d):
        e, s = d
        return (e, -s)

    def random_point(self, rng):
        e = rng.randrange(len(self.edge_u))
        return self.validate_point(TreePoint(e, rng.uniform(0.0, self.edge_len[e])))

    def describe(self):
        return {
            "kind": self.kind,
            "edges": [[self.vertices[self.edge_u[e]], self.vertices[self.edge_v[e]],
                       self.edge_len[e]] for e in range(len(self.edge_u))],
        }
