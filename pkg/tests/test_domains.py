"""Domain operations: examples, metric properties, and the grid oracle."""

import math
import random

import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from geopursuit import (
    ConvexPlanarRegion,
    EuclideanSpace,
    MetricTree,
    PlaneMinusDisks,
    SphereDomain,
    TieBreak,
    TreePoint,
)
from geopursuit.domains import LinePiece
from geopursuit.errors import (
    AmbiguityError,
    DegenerateError,
    InvalidDomainError,
    InvalidPointError,
    RangeError,
)

UNIT_DISK_REMOVED = PlaneMinusDisks([((0.0, 0.0), 1.0)])
TWO_DISKS = PlaneMinusDisks([((0.0, 0.0), 1.0), ((4.0, 1.0), 1.5)])


def small_tree():
    return MetricTree([
        ("a", "b", 1.0), ("b", "c", 2.0), ("b", "d", 0.5),
        ("d", "e", 1.5), ("a", "f", 0.75),
    ])


def all_domains():
    return [
        EuclideanSpace(2),
        EuclideanSpace(3),
        ConvexPlanarRegion(disk_radius=1.0),
        SphereDomain(1.0),
        TWO_DISKS,
        small_tree(),
    ]


# ---------------------------------------------------------------------------
# distance examples


def test_euclidean_distance_pythagorean():
    assert EuclideanSpace(2).distance((0, 0), (3, 4)) == pytest.approx(5.0)


def test_sphere_antipodal_distance():
    s = SphereDomain(1.0)
    p = np.array([0.3, -0.5, 0.8])
    p = p / np.linalg.norm(p)
    assert s.distance(p, -p) == pytest.approx(math.pi, abs=1e-12)


def test_disk_wrap_distance_closed_form():
    expected = 2.0 * math.sqrt(3.0) + math.pi / 3.0
    got = UNIT_DISK_REMOVED.distance((-2, 0), (2, 0))
    assert got == pytest.approx(expected, abs=1e-12)


def test_invalid_point_names_disk():
    with pytest.raises(InvalidPointError, match="disk 0"):
        UNIT_DISK_REMOVED.distance((0.2, 0.1), (2, 0))


def test_tree_invalid_offset_names_edge():
    t = small_tree()
    with pytest.raises(InvalidPointError, match="edge 1"):
        t.distance(TreePoint(1, 5.0), t.vertex_point("a"))


# ---------------------------------------------------------------------------
# shortest_path examples


def test_euclidean_path_single_line():
    path = EuclideanSpace(2).shortest_path((0, 0), (1, 1))
    assert len(path.pieces) == 1
    assert isinstance(path.pieces[0], LinePiece)
    assert path.length == pytest.approx(math.sqrt(2.0))


def test_disk_wrap_upper_path_structure():
    path = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.upper())
    kinds = [type(p).__name__ for p in path.pieces]
    assert kinds == ["LinePiece", "ArcPiece", "LinePiece"]
    arc = path.pieces[1]
    assert arc.start_angle == pytest.approx(2 * math.pi / 3, abs=1e-9)
    assert arc.end_angle == pytest.approx(math.pi / 3, abs=1e-9)
    assert arc.point_at(arc.length / 2)[1] > 0  # over the top
    assert path.check_invariants() <= 1e-9


def test_disk_wrap_lower_is_mirror():
    upper = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.upper())
    lower = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.lower())
    assert upper.length == pytest.approx(lower.length, abs=1e-12)
    assert lower.pieces[1].point_at(lower.pieces[1].length / 2)[1] < 0


def test_sphere_antipodal_forbid_raises():
    s = SphereDomain(1.0)
    with pytest.raises(AmbiguityError):
        s.shortest_path((0, 0, 1.0), (0, 0, -1.0), TieBreak.forbid())


def test_disk_wrap_forbid_lists_candidates():
    d = PlaneMinusDisks([((0.0, 0.0), 2.0)])
    p = np.array([2.0, 0.0])
    with pytest.raises(AmbiguityError) as exc:
        d.shortest_path(p, -p, TieBreak.forbid())
    assert len(exc.value.candidates) == 2


# ---------------------------------------------------------------------------
# point_along examples


def test_point_along_line():
    e2 = EuclideanSpace(2)
    path = e2.shortest_path((0, 0), (10, 0))
    assert np.allclose(e2.point_along(path, 1.0), [1, 0])
    assert np.allclose(e2.point_along(path, 0.0), [0, 0])
    assert np.allclose(e2.point_along(path, path.length), [10, 0])


def test_point_along_range_error():
    path = EuclideanSpace(2).shortest_path((0, 0), (1, 0))
    with pytest.raises(RangeError):
        EuclideanSpace(2).point_along(path, 2.0)


def test_point_along_wrap_hits_tangency():
    path = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.upper())
    pt = UNIT_DISK_REMOVED.point_along(path, math.sqrt(3.0))
    assert np.allclose(pt, [-0.5, math.sqrt(3.0) / 2], atol=1e-9)


# ---------------------------------------------------------------------------
# direction_at / angle_at examples


def test_direction_line_and_tangency():
    e2 = EuclideanSpace(2)
    path = e2.shortest_path((0, 0), (1, 0))
    assert np.allclose(e2.direction_at(path, "start"), [1, 0])
    wrap = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.upper())
    line, arc = wrap.pieces[0], wrap.pieces[1]
    d_line = line.travel_direction(line.length)
    d_arc = arc.travel_direction(0.0)
    assert np.allclose(d_line, d_arc, atol=1e-9)


def test_direction_degenerate():
    e2 = EuclideanSpace(2)
    path = e2.shortest_path((1, 1), (1, 1))
    with pytest.raises(DegenerateError):
        e2.direction_at(path)


def test_tree_direction_away_from_vertex():
    t = small_tree()
    path = t.shortest_path(t.vertex_point("b"), t.vertex_point("c"))
    edge, sign = t.direction_at(path, "start")
    assert edge == 1 and sign == 1


def test_angle_examples():
    e2 = EuclideanSpace(2)
    assert e2.angle_at((0, 0), (1, 0), (0, 1)) == pytest.approx(math.pi / 2)
    assert e2.angle_at((0, 0), (1, 1), (1, 1)) == pytest.approx(0.0)
    t = small_tree()
    assert t.angle_at(t.vertex_point("b"), t.vertex_point("a"),
                      t.vertex_point("c")) == pytest.approx(math.pi)


def test_angle_degenerate():
    with pytest.raises(DegenerateError):
        EuclideanSpace(2).angle_at((0, 0), (0, 0), (1, 0))


# ---------------------------------------------------------------------------
# domain construction invariants


def test_disks_must_be_disjoint_and_large():
    with pytest.raises(InvalidDomainError):
        PlaneMinusDisks([((0, 0), 1.0), ((1.5, 0), 1.0)])
    with pytest.raises(InvalidDomainError):
        PlaneMinusDisks([((0, 0), 0.5)])
    PlaneMinusDisks([((0, 0), 0.5)], min_radius_check=False)  # corrupted control


def test_tree_must_be_tree():
    with pytest.raises(InvalidDomainError):
        MetricTree([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
    with pytest.raises(InvalidDomainError):
        MetricTree([("a", "b", 0.0)])


def test_polygon_convexity_validated():
    ConvexPlanarRegion(polygon=[(0, 0), (2, 0), (2, 2), (0, 2)])
    with pytest.raises(InvalidDomainError):
        ConvexPlanarRegion(polygon=[(0, 0), (2, 0), (0.5, 0.5), (0, 2)])


def test_curvature_bounds_and_flags():
    assert EuclideanSpace(2).curvature_bound == 0 and not EuclideanSpace(2).compact
    sph = SphereDomain(2.0)
    assert sph.curvature_bound == pytest.approx(0.25)
    assert sph.threshold == pytest.approx(2 * math.pi)
    assert sph.compact
    assert TWO_DISKS.curvature_bound == 1.0 and TWO_DISKS.threshold == pytest.approx(math.pi)
    assert not TWO_DISKS.compact
    assert small_tree().compact and small_tree().threshold == math.inf
    assert ConvexPlanarRegion(disk_radius=1.0).compact


# ---------------------------------------------------------------------------
# metric properties on random samples


def _k_margin_pair(domain, rng):
    for _ in range(200):
        p = domain.random_point(rng)
        q = domain.random_point(rng)
        d = domain.distance(p, q)
        if d > 1e-3 and d < 0.9 * domain.threshold:
            return p, q, d
    raise AssertionError("could not sample a pair")


@pytest.mark.parametrize("domain", all_domains(), ids=lambda d: d.kind + str(id(d))[-3:])
def test_triangle_inequality(domain):
    rng = random.Random(11)
    trials = 1000
    for _ in range(trials):
        p, q, r = (domain.random_point(rng) for _ in range(3))
        dpr = domain.distance(p, r)
        dpq = domain.distance(p, q)
        dqr = domain.distance(q, r)
        assert dpr <= dpq + dqr + 1e-9
        assert dpq == pytest.approx(domain.distance(q, p), abs=1e-9)
    assert domain.distance(p, p) == 0.0


@pytest.mark.parametrize("domain", all_domains(), ids=lambda d: d.kind + str(id(d))[-3:])
def test_geodesic_consistency(domain):
    rng = random.Random(23)
    trials = 40 if domain.kind == "plane_minus_disks" else 120
    for _ in range(trials):
        p, q, d = _k_margin_pair(domain, rng)
        path = domain.shortest_path(p, q, TieBreak.upper())
        assert path.length == pytest.approx(d, abs=1e-9)
        s = rng.uniform(0.0, d)
        mid = domain.point_along(path, s)
        assert (domain.distance(p, mid) + domain.distance(mid, q)
                == pytest.approx(d, abs=1e-8))


@pytest.mark.parametrize("domain", all_domains(), ids=lambda d: d.kind + str(id(d))[-3:])
def test_angle_triangle_inequality(domain):
    rng = random.Random(37)
    trials = 25 if domain.kind == "plane_minus_disks" else 100
    tb = TieBreak.upper()
    for _ in range(trials):
        pts = []
        p = domain.random_point(rng)
        for _ in range(3):
            while True:
                x = domain.random_point(rng)
                d = domain.distance(p, x)
                if 1e-2 < d < 0.9 * domain.threshold:
                    pts.append(x)
                    break
        q, r, w = pts
        aqr = domain.angle_at(p, q, r, tb)
        aqw = domain.angle_at(p, q, w, tb)
        awr = domain.angle_at(p, w, r, tb)
        assert aqr <= aqw + awr + 1e-9


# ---------------------------------------------------------------------------
# dense grid-graph oracle for removed-disk distances


class GridOracle:
    """Independent shortest-path oracle: dense angular nodes on every
    boundary circle (arc pitch <= 1e-2), exact arc edges between angular
    neighbours, straight visibility edges elsewhere, scipy Dijkstra on top.
    """

    def __init__(self, domain, pitch=1e-2):
        self.domain = domain
        self.nodes = []
        self.circle_of = []
        self.blocks = []
        arc_edges = []
        for ci, (c, r) in enumerate(domain.disks):
            n = int(math.ceil(2 * math.pi * r / pitch))
            base = len(self.nodes)
            self.blocks.append((base, n, np.asarray(c), r))
            for k in range(n):
                ang = 2 * math.pi * k / n
                self.nodes.append(c + r * np.array([math.cos(ang), math.sin(ang)]))
                self.circle_of.append(ci)
            seg = 2 * math.pi * r / n
            for k in range(n):
                arc_edges.append((base + k, base + (k + 1) % n, seg))
        self.nodes = np.asarray(self.nodes)
        self.arc_edges = arc_edges
        self.cross_edges = self._cross_visibility()

    def _terminal_arc_edges(self, tid, tpt):
        """Arc hops to the angular ring neighbours when tpt sits on a circle."""
        edges = []
        for base, n, c, r in self.blocks:
            if abs(np.linalg.norm(tpt - c) - r) > 1e-9:
                continue
            ang = math.atan2(tpt[1] - c[1], tpt[0] - c[0]) % (2 * math.pi)
            frac = ang / (2 * math.pi) * n
            below = int(math.floor(frac)) % n
            above = (below + 1) % n
            for k, gap in ((below, frac - math.floor(frac)),
                           (above, math.floor(frac) + 1.0 - frac)):
                edges.append((tid, base + k, 2 * math.pi * r * gap / n))
        return edges

    def _seg_clear_many(self, a_pts, b_pts):
        """Vector mask: does segment a_pts[k] -> b_pts[k] avoid every open disk."""
        a = np.asarray(a_pts, dtype=float)
        b = np.asarray(b_pts, dtype=float)
        ok = np.ones(len(a), dtype=bool)
        for c, r in self.domain.disks:
            ab = b - a
            denom = np.einsum("ij,ij->i", ab, ab)
            denom[denom == 0] = 1.0
            t = np.clip(np.einsum("ij,ij->i", np.asarray(c) - a, ab) / denom, 0, 1)
            foot = a + t[:, None] * ab
            ok &= np.linalg.norm(foot - np.asarray(c), axis=1) >= r - 1e-9
        return ok

    def _cross_visibility(self):
        edges = []
        circ = np.asarray(self.circle_of)
        for ci in range(len(self.domain.disks)):
            for cj in range(ci + 1, len(self.domain.disks)):
                ii = np.nonzero(circ == ci)[0]
                jj = np.nonzero(circ == cj)[0]
                A = np.repeat(ii, len(jj))
                B = np.tile(jj, len(ii))
                mask = self._seg_clear_many(self.nodes[A], self.nodes[B])
                w = np.linalg.norm(self.nodes[A] - self.nodes[B], axis=1)
                for u, v, ww in zip(A[mask], B[mask], w[mask]):
                    edges.append((int(u), int(v), float(ww)))
        return edges

    def distance(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        n = len(self.nodes)
        rows, cols, vals = [], [], []
        for u, v, w in self.arc_edges + self.cross_edges:
            rows.append(u), cols.append(v), vals.append(w)
        for ti, tpt in ((n, p), (n + 1, q)):
            mask = self._seg_clear_many(np.broadcast_to(tpt, self.nodes.shape),
                                        self.nodes)
            w = np.linalg.norm(self.nodes - tpt, axis=1)
            for v in np.nonzero(mask)[0]:
                rows.append(ti), cols.append(int(v)), vals.append(float(w[v]))
            for u, v, ww in self._terminal_arc_edges(ti, tpt):
                rows.append(u), cols.append(v), vals.append(ww)
        if self._seg_clear_many(p[None, :], q[None, :])[0]:
            rows.append(n), cols.append(n + 1), vals.append(float(np.linalg.norm(p - q)))
        mat = coo_matrix((vals + vals, (rows + cols, cols + rows)),
                         shape=(n + 2, n + 2)).tocsr()
        dist = sparse_dijkstra(mat, indices=[n])[0]
        return float(dist[n + 1])


THREE_DISKS = PlaneMinusDisks([((0.0, 0.0), 1.0), ((4.0, 1.0), 1.5),
                               ((1.5, -4.0), 1.0)])


@pytest.mark.parametrize("domain,pairs", [(UNIT_DISK_REMOVED, 20), (TWO_DISKS, 30)],
                         ids=["one_disk", "two_disks"])
def test_grid_oracle_agreement(domain, pairs):
    oracle = GridOracle(domain)
    rng = random.Random(5)
    for _ in range(pairs):
        p = domain.random_point(rng)
        q = domain.random_point(rng)
        got = domain.distance(p, q)
        want = oracle.distance(p, q)
        assert got == pytest.approx(want, abs=1e-3)
        assert got <= want + 1e-9  # oracle paths are feasible, never shorter


def test_grid_oracle_three_disks_boundary_biased():
    oracle = GridOracle(THREE_DISKS)
    rng = random.Random(6)

    def near_boundary_point(rng):
        c, r = THREE_DISKS.disks[rng.randrange(3)]
        ang = rng.uniform(0, 2 * math.pi)
        return c + (r + rng.uniform(0.0, 1.0)) * np.array(
            [math.cos(ang), math.sin(ang)])

    for _ in range(25):
        p = near_boundary_point(rng)
        q = near_boundary_point(rng)
        got = THREE_DISKS.distance(p, q)
        assert got == pytest.approx(oracle.distance(p, q), abs=1e-3)


def test_multi_contact_wrap_structure():
    p = np.array([-2.5, -0.5])
    q = np.array([6.5, 2.2])
    path = THREE_DISKS.shortest_path(p, q, TieBreak.upper())
    kinds = [type(pc).__name__ for pc in path.pieces]
    assert kinds.count("ArcPiece") >= 2  # bends around two circles
    assert path.check_invariants() <= 1e-9
    assert path.length == pytest.approx(THREE_DISKS.distance(p, q), abs=1e-9)


def test_grid_oracle_on_closed_form():
    oracle = GridOracle(UNIT_DISK_REMOVED)
    want = 2 * math.sqrt(3.0) + math.pi / 3.0
    assert oracle.distance(np.array([-2.0, 0]), np.array([2.0, 0])) == pytest.approx(
        want, abs=1e-3)


def test_grid_oracle_same_circle_points():
    # the closed-form fast path for two points on one boundary circle must
    # agree with the independent oracle, other disks present or not
    oracle = GridOracle(TWO_DISKS)
    rng = random.Random(2)
    for _ in range(15):
        c, r = TWO_DISKS.disks[rng.randrange(2)]
        a1, a2 = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
        p = c + r * np.array([math.cos(a1), math.sin(a1)])
        q = c + r * np.array([math.cos(a2), math.sin(a2)])
        assert TWO_DISKS.distance(p, q) == pytest.approx(
            oracle.distance(p, q), abs=1e-3)


# ---------------------------------------------------------------------------
# tie-break behaviour


def test_alternate_tiebreak_flips():
    d = PlaneMinusDisks([((0.0, 0.0), 2.0)])
    tb = TieBreak.alternate()
    p = np.array([2.0, 0.0])
    first = d.shortest_path(p, -p, tb)
    second = d.shortest_path(p, -p, tb)
    y1 = first.point_at(first.length / 2)[1]
    y2 = second.point_at(second.length / 2)[1]
    assert y1 * y2 < 0  # opposite wraps


def test_boundary_point_is_valid():
    d = PlaneMinusDisks([((0.0, 0.0), 2.0)])
    d.validate_point((2.0, 0.0))
    d.validate_point((0.0, -2.0))


def test_path_reversal_coherence():
    path = UNIT_DISK_REMOVED.shortest_path((-2, 0), (2, 0), TieBreak.upper())
    rev = path.reversed()
    assert rev.length == pytest.approx(path.length, abs=1e-12)
    assert np.allclose(rev.start, path.end) and np.allclose(rev.end, path.start)
    assert np.allclose(rev.direction("start"), -np.asarray(path.direction("finish")))
    s = 1.3
    assert np.allclose(rev.point_at(s), path.point_at(path.length - s), atol=1e-12)
    assert rev.check_invariants() <= 1e-9
