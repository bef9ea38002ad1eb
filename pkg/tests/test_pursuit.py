"""Pursuit engine: step examples, game invariants, policies, dyadic runs."""

import math
import random

import numpy as np
import pytest

from geopursuit import (
    AntipodalOscillator,
    CircleOrbiter,
    ConvexPlanarRegion,
    EuclideanSpace,
    GeodesicRunner,
    MetricTree,
    PlaneMinusDisks,
    RandomWalkPolicy,
    SphereDomain,
    SpiralPolicy,
    TieBreak,
    Waypoints,
    pursuit_step,
    run_discrete,
    run_dyadic,
)
from geopursuit.errors import (
    CaptureSignal,
    ConfigurationError,
    HypothesisError,
    PolicyViolationError,
)
from geopursuit.pursuit import EvaderPolicy

E2 = EuclideanSpace(2)
DISK2 = PlaneMinusDisks([((0.0, 0.0), 2.0)])


def tree20():
    rng = random.Random(4)
    edges = []
    for i in range(1, 21):
        parent = rng.randrange(i)
        edges.append((parent, i, rng.uniform(0.5, 1.5)))
    return MetricTree(edges)


# ---------------------------------------------------------------------------
# pursuit_step


def test_step_euclidean():
    p = pursuit_step(E2, (0, 0), (10, 0), 1.0)
    assert np.allclose(p, [1, 0])


def test_step_sphere_great_circle():
    s = SphereDomain(1.0)
    P = np.array([0.0, 0.0, 1.0])
    E = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    nxt = pursuit_step(s, P, E, 0.5)
    assert s.distance(P, nxt) == pytest.approx(0.5, abs=1e-12)
    assert s.distance(nxt, E) == pytest.approx(0.5, abs=1e-12)


def test_step_wrap_onto_arc():
    # step distance exceeds the tangent leg, so the point sits on the arc
    one = PlaneMinusDisks([((0.0, 0.0), 1.0)])
    nxt = pursuit_step(one, (-2, 0), (2, 0), 2.0, TieBreak.upper())
    ang = 2.0 * math.pi / 3.0 - (2.0 - math.sqrt(3.0))
    assert np.allclose(nxt, [math.cos(ang), math.sin(ang)], atol=1e-9)
    assert one.distance(nxt, (2, 0)) == pytest.approx(
        2.0 * math.sqrt(3.0) + math.pi / 3.0 - 2.0, abs=1e-9)


def test_step_capture_signal():
    with pytest.raises(CaptureSignal):
        pursuit_step(E2, (0, 0), (0.5, 0), 1.0)


# ---------------------------------------------------------------------------
# run_discrete basics


def test_collinear_chase_invariant_line():
    policy = GeodesicRunner(start=(5, 0), direction=(1, 0))
    tr = run_discrete(E2, (0, 0), policy, 0.1, 2000)
    assert tr.capture_step is None
    assert np.max(np.abs(tr.L - 5.0)) <= 1e-9
    assert tr.tau_P[-1] <= 1e-9


def _pursuit_ode_oracle(L0, T, dt):
    """Midpoint-rule integration of continuous pursuit of a straight evader.

    Independent of the discrete engine: integrates P' = (E - P)/|E - P| with
    E(t) = (t, L0)."""
    px, py = 0.0, 0.0
    t = 0.0
    n = int(round(T / dt))
    for _ in range(n):
        ex, ey = t, L0
        dx, dy = ex - px, ey - py
        d = math.hypot(dx, dy)
        mx = px + 0.5 * dt * dx / d
        my = py + 0.5 * dt * dy / d
        ex2, ey2 = t + 0.5 * dt, L0
        dx2, dy2 = ex2 - mx, ey2 - my
        d2 = math.hypot(dx2, dy2)
        px += dt * dx2 / d2
        py += dt * dy2 / d2
        t += dt
    return math.hypot(t - px, L0 - py)


def test_perpendicular_chase_matches_ode_oracle():
    L_oracle = _pursuit_ode_oracle(5.0, 200.0, 1e-3)
    policy = GeodesicRunner(start=(0, 5), direction=(1, 0))
    tr = run_discrete(E2, (0, 0), policy, 1e-3, 200000, record_stride=128)
    assert tr.L_final == pytest.approx(L_oracle, abs=2e-3)
    # classical equal-speed limit L0*(1+cos(pi/2))/2 confirmed numerically
    L_far = _pursuit_ode_oracle(5.0, 2000.0, 1e-2)
    assert L_far == pytest.approx(2.5, abs=0.01)


def test_compact_disk_capture():
    domain = ConvexPlanarRegion(disk_radius=1.0)
    policy = RandomWalkPolicy(start=(0.6, 0.3))
    tr = run_discrete(domain, (-0.8, 0.0), policy, 0.05, 10**6, seed=1)
    assert tr.capture_step is not None
    assert tr.L_final <= 0.05


def test_compact_polygon_region_capture():
    domain = ConvexPlanarRegion(polygon=[(-1, -1), (1.5, -1), (1.5, 1), (-1, 1)])
    policy = RandomWalkPolicy(start=(1.0, 0.5))
    tr = run_discrete(domain, (-0.8, -0.5), policy, 0.05, 10**6, seed=5)
    assert tr.capture_step is not None


def test_three_dimensional_space_run():
    e3 = EuclideanSpace(3)
    policy = RandomWalkPolicy(start=(0.0, 0.0, 3.0))
    tr = run_discrete(e3, (0.0, 0.0, 0.0), policy, 0.1, 400, seed=6)
    assert tr.worst_monotone <= 1e-9
    from geopursuit.verify import check_angle_sandwich
    assert check_angle_sandwich(tr).passed


def test_compact_tree_capture():
    tree = tree20()
    policy = RandomWalkPolicy(start=tree.random_point(random.Random(2)))
    tr = run_discrete(tree, tree.vertex_point(0), policy, 0.05, 10**6, seed=3)
    assert tr.capture_step is not None


def test_capture_is_inclusive_at_exact_step():
    class Freeze(EvaderPolicy):
        name = "freeze"

        def reset(self, domain, pursuer_start):
            return np.array([1.0, 0.0])

        def propose(self, ctx):
            return np.array([1.0, 0.0])

    tr = run_discrete(E2, (0, 0), Freeze(), 0.5, 100)
    assert tr.capture_step == 1  # L_1 = 0.5 <= D counts as capture
    assert tr.L_final == pytest.approx(0.5)


def test_policy_violation_reports_step():
    class Cheater(EvaderPolicy):
        name = "cheater"

        def reset(self, domain, pursuer_start):
            return np.array([5.0, 0.0])

        def propose(self, ctx):
            return np.array([50.0, 0.0]) if ctx.step == 3 else np.array([5.0, 0.0])

    with pytest.raises(PolicyViolationError) as exc:
        run_discrete(E2, (0, 0), Cheater(), 0.1, 10)
    assert exc.value.step == 3


def test_long_start_needs_opt_in():
    policy = AntipodalOscillator(disk=0)
    with pytest.raises(HypothesisError):
        run_discrete(DISK2, (2, 0), policy, 1.0, 10,
                     tie_break=TieBreak.alternate())
    tr = run_discrete(DISK2, (2, 0), policy, 1.0, 10,
                      tie_break=TieBreak.alternate(), allow_long_start=True)
    assert tr.L0 == pytest.approx(2 * math.pi)


def test_bad_config():
    policy = GeodesicRunner(start=(5, 0), direction=(1, 0))
    with pytest.raises(ConfigurationError):
        run_discrete(E2, (0, 0), policy, -1.0, 10)
    with pytest.raises(ConfigurationError):
        GeodesicRunner(start=(0, 0))


# ---------------------------------------------------------------------------
# trace bookkeeping


def test_antipodal_turns_pi_per_step():
    policy = AntipodalOscillator(disk=0)
    tr = run_discrete(DISK2, (2, 0), policy, 1.0, 50,
                      tie_break=TieBreak.alternate(), allow_long_start=True)
    assert np.max(np.abs(tr.L - 2 * math.pi)) <= 1e-9
    inc = np.diff(tr.tau_P)
    assert inc[0] == pytest.approx(0.0, abs=1e-12)  # no turn recorded yet
    assert np.max(np.abs(inc[1:] - math.pi)) <= 1e-9
    assert tr.tau_P[-1] == pytest.approx((len(tr.tau_P) - 2) * math.pi, abs=1e-6)


def test_orbit_equality_case_witness():
    policy = CircleOrbiter(disk=0, arc_ahead=1.0)
    tr = run_discrete(DISK2, (2, 0), policy, 0.05, 300)
    finite = np.isfinite(tr.beta)
    assert np.max(np.abs(tr.beta[finite] - math.pi)) <= 1e-6
    finite = np.isfinite(tr.phi)
    assert np.max(np.abs(tr.phi[finite] - math.pi)) <= 1e-6
    assert tr.B_min is not None and tr.B_min > 0


def test_trace_telescoping_and_monotonicity():
    policy = Waypoints(start=(0, 5), points=[(3, 8), (6, 5), (40, 5)])
    tr = run_discrete(E2, (0, 0), policy, 0.25, 120)
    finite = np.isfinite(tr.Delta)
    assert np.sum(tr.Delta[finite]) == pytest.approx(tr.L[0] - tr.L[-1], abs=1e-9)
    assert np.min(tr.Delta[finite]) >= -1e-9
    assert tr.worst_monotone <= 1e-9


def test_determinism_bitwise():
    a = run_discrete(ConvexPlanarRegion(disk_radius=1.0), (-0.8, 0.0),
                     RandomWalkPolicy(start=(0.6, 0.3)), 0.05, 3000, seed=11)
    b = run_discrete(ConvexPlanarRegion(disk_radius=1.0), (-0.8, 0.0),
                     RandomWalkPolicy(start=(0.6, 0.3)), 0.05, 3000, seed=11)
    assert a.capture_step == b.capture_step
    assert np.array_equal(a.L, b.L)
    assert np.array_equal(a.tau_P, b.tau_P)
    for pa, pb in zip(a.P_points, b.P_points):
        assert np.array_equal(pa, pb)


def test_fast_loop_matches_generic_engine():
    # straight-runner plane scenarios take a tight loop; a far-target runner
    # forces the generic engine on the same dynamics
    fast = run_discrete(E2, (0, 0), GeodesicRunner(start=(0, 5), direction=(1, 0)),
                        0.01, 3000)
    slow = run_discrete(E2, (0, 0), GeodesicRunner(start=(0, 5), target=(1e9, 5)),
                        0.01, 3000)
    assert np.max(np.abs(fast.L - slow.L)) <= 1e-12
    assert np.max(np.abs(fast.tau_P - slow.tau_P)) <= 1e-9
    assert np.nanmax(np.abs(fast.alpha - slow.alpha)) <= 1e-12
    assert np.max(np.abs(fast.c_P - slow.c_P)) <= 1e-12


def test_stride_recording_consistent_with_full():
    policy = GeodesicRunner(start=(0, 5), target=(80, 5))
    full = run_discrete(E2, (0, 0), policy, 0.1, 400, record_stride=1)
    policy2 = GeodesicRunner(start=(0, 5), target=(80, 5))
    thin = run_discrete(E2, (0, 0), policy2, 0.1, 400, record_stride=50)
    idx = np.nonzero(np.isin(full.steps, thin.steps))[0]
    assert np.allclose(full.L[idx], thin.L)
    assert np.allclose(full.tau_P[idx], thin.tau_P)
    assert np.allclose(full.c_P[idx], thin.c_P)


def test_spiral_policy_runs_and_escapes():
    policy = SpiralPolicy(u0=1.0)
    tr = run_discrete(E2, (-6, 0), policy, 0.05, 4000)
    assert tr.capture_step is None
    steps = np.linalg.norm(np.diff(np.asarray(tr.E_points), axis=0), axis=1)
    assert np.max(steps) <= 0.05 + 1e-9


def test_evader_points_stay_valid_random_scenarios():
    rng = random.Random(99)
    for domain in (E2, ConvexPlanarRegion(disk_radius=1.0), DISK2,
                   SphereDomain(1.0), tree20()):
        for trial in range(3):
            while True:
                P0 = domain.random_point(rng)
                E0 = domain.random_point(rng)
                d = domain.distance(P0, E0)
                if 0.5 < d < 0.9 * domain.threshold:
                    break
            policy = RandomWalkPolicy(start=E0)
            tr = run_discrete(domain, P0, policy, 0.05, 60,
                              seed=trial, tie_break=TieBreak.upper())
            for e in tr.E_points:
                domain.validate_point(e)


# ---------------------------------------------------------------------------
# dyadic refinement


def test_dyadic_stationary_evader():
    target = np.array([10.0, 0.0])
    report = run_dyadic(E2, (0, 0), lambda t: target, 3, 6, 4.0)
    assert report.horizon == pytest.approx(4.0)
    assert not report.rounded
    for gap in report.sup_gaps:
        assert gap <= 1e-9


def test_dyadic_straight_evader_converges():
    track = lambda t: np.array([t, 5.0])
    report = run_dyadic(E2, (0, 0), track, 4, 8, 10.0)
    gaps = report.sup_gaps
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_dyadic_horizon_rounding_flag():
    track = lambda t: np.array([t, 5.0])
    report = run_dyadic(E2, (0, 0), track, 2, 3, 1.1)
    assert report.rounded
    assert report.horizon == pytest.approx(1.0)


def test_dyadic_on_sphere():
    sphere = SphereDomain(1.0)
    u = np.array([0.0, 0.0, 1.0])
    w = np.array([1.0, 0.0, 0.0])

    def track(t):
        return math.cos(t) * u + math.sin(t) * w

    P0 = np.array([0.0, math.sin(1.2), math.cos(1.2)])
    report = run_dyadic(sphere, P0, track, 3, 6, 2.0)
    assert all(b < a for a, b in zip(report.sup_gaps, report.sup_gaps[1:]))


def test_dyadic_orbit_separation_ratio():
    c, r = np.array([0.0, 0.0]), 2.0
    a0 = 1.0 / r

    def track(t):
        ang = a0 + t / r
        return c + r * np.array([math.cos(ang), math.sin(ang)])

    report = run_dyadic(DISK2, (2.0, 0.0), track, 3, 6, 4.0)
    fine = report.traces[-1]
    for tr in report.traces[-2:]:
        skip = max(1, int(round(tr.step_size / fine.step_size)))
        coarse_on_fine = fine.L[::skip][:len(tr.L)]
        m = min(len(coarse_on_fine), len(tr.L))
        assert np.all(tr.L[:m] > coarse_on_fine[:m] / 2.0)
