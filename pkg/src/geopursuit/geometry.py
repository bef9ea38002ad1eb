"""Low-level planar and vector helpers used by the domain solvers."""

import math

import numpy as np

from .errors import DegenerateError

TWO_PI = 2.0 * math.pi


def as_vec(p, dim=None):
    a = np.atleast_1d(np.asarray(p, dtype=float))
    if a.ndim != 1:
        raise DegenerateError("expected a flat coordinate vector, got shape %s" % (a.shape,))
    if dim is not None and a.shape[0] != dim:
        raise DegenerateError("expected a %d-vector, got %d components" % (dim, a.shape[0]))
    return a


def norm(v):
    return float(np.linalg.norm(v))


def unit(v):
    n = norm(v)
    if n == 0.0:
        raise DegenerateError("cannot normalize the zero vector")
    return np.asarray(v, dtype=float) / n


def angle_between(u, v):
    """Angle in [0, pi] between two vectors, stable near 0 and pi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = float(np.dot(u, v))
    if u.shape[-1] == 2:
        s = abs(float(u[0] * v[1] - u[1] * v[0]))
    else:
        s = norm(np.cross(u, v))
    return math.atan2(s, c)


def azimuth(v):
    return math.atan2(v[1], v[0])


def e_vec(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def ccw_tangent(theta):
    """Unit tangent of the counterclockwise parametrization at polar angle theta."""
    return np.array([-math.sin(theta), math.cos(theta)])


def ccw_gap(a, b):
    """Counterclockwise angular gap from a to b, in [0, 2*pi)."""
    return (b - a) % TWO_PI


def point_segment_distance(p, a, b):
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return norm(p - a)
    t = float(np.dot(p - a, ab)) / denom
    t = min(1.0, max(0.0, t))
    return norm(p - (a + t * ab))


def segment_clears_disk(a, b, center, radius, tol):
    """True when segment ab stays outside the open disk shrunk by tol."""
    return point_segment_distance(center, a, b) >= radius - tol


def tangent_touch_angles(p, center, radius):
    """Polar angles (about center) of the two tangency points seen from external p."""
    rel = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    d = norm(rel)
    if d <= radius:
        raise DegenerateError("tangent lines require a point strictly outside the circle")
    phi = azimuth(rel)
    off = math.acos(min(1.0, radius / d))
    return [phi + off, phi - off]


def bitangent_specs(c1, r1, c2, r2):
    """Touch-angle pairs (theta1, theta2, kind) for the bitangents of two circles.

    Touch points are c1 + r1*e(theta1) and c2 + r2*e(theta2).  kind is
    "outer" (normals parallel) or "inner" (normals opposite; the line crosses
    between the circles).
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    dvec = c2 - c1
    d = norm(dvec)
    az = azimuth(dvec)
    out = []
    if d > abs(r1 - r2) + 1e-15:
        off = math.acos(max(-1.0, min(1.0, (r1 - r2) / d)))
        for s in (1.0, -1.0):
            t = az + s * off
            out.append((t, t, "outer"))
    if d > r1 + r2 + 1e-15:
        off = math.acos(max(-1.0, min(1.0, (r1 + r2) / d)))
        for s in (1.0, -1.0):
            t = az + s * off
            out.append((t, t + math.pi, "inner"))
    return out


def polyline_loop_area(points):
    """Signed shoelace area of the closed loop polyline + implicit closing edge."""
    pts = np.asarray(points, dtype=float)
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def left_of_chord_score(points):
    """Positive when the path bulges left of its directed start-to-end chord."""
    return -polyline_loop_area(points)
