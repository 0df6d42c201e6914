"""Exact rational 3-vector geometry.

All vector data that feeds the topological pipeline (combing values,
sections, frame transitions) is kept as `fractions.Fraction` triples so the
downstream zero-set extraction, homology and linking computations are exact.
Rotations are produced from rational quaternions via the Euler–Rodrigues
formula, which yields exactly orthogonal matrices with rational entries.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

Vec3 = tuple[Fraction, Fraction, Fraction]
Mat3 = tuple[Vec3, Vec3, Vec3]

ZERO3: Vec3 = (Fraction(0), Fraction(0), Fraction(0))
E1: Vec3 = (Fraction(1), Fraction(0), Fraction(0))
E2: Vec3 = (Fraction(0), Fraction(1), Fraction(0))
E3: Vec3 = (Fraction(0), Fraction(0), Fraction(1))

IDENTITY3: Mat3 = (E1, E2, E3)


def vec3(x, y, z) -> Vec3:
    return (Fraction(x), Fraction(y), Fraction(z))


def add(u: Vec3, v: Vec3) -> Vec3:
    return (u[0] + v[0], u[1] + v[1], u[2] + v[2])


def sub(u: Vec3, v: Vec3) -> Vec3:
    return (u[0] - v[0], u[1] - v[1], u[2] - v[2])


def neg(u: Vec3) -> Vec3:
    return (-u[0], -u[1], -u[2])


def scale(c, u: Vec3) -> Vec3:
    c = Fraction(c)
    return (c * u[0], c * u[1], c * u[2])


def dot(u: Vec3, v: Vec3) -> Fraction:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def cross(u: Vec3, v: Vec3) -> Vec3:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def norm_sq(u: Vec3) -> Fraction:
    return dot(u, u)


def is_zero(u: Vec3) -> bool:
    return u[0] == 0 and u[1] == 0 and u[2] == 0


def is_unit(u: Vec3, tol: float = 1e-12) -> bool:
    return abs(float(norm_sq(u)) - 1.0) <= tol


def mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return (dot(m[0], v), dot(m[1], v), dot(m[2], v))


def mat_mul(a: Mat3, b: Mat3) -> Mat3:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)  # type: ignore


def transpose(m: Mat3) -> Mat3:
    return (
        (m[0][0], m[1][0], m[2][0]),
        (m[0][1], m[1][1], m[2][1]),
        (m[0][2], m[1][2], m[2][2]),
    )


def det3(m: Mat3) -> Fraction:
    return dot(m[0], cross(m[1], m[2]))


def is_rotation(m: Mat3, tol: float = 1e-12) -> bool:
    """True if m is special orthogonal within tol (exactly, for rational
    rotations built by this module)."""
    mt = transpose(m)
    prod = mat_mul(m, mt)
    for i in range(3):
        for j in range(3):
            want = 1 if i == j else 0
            if abs(float(prod[i][j]) - want) > tol:
                return False
    return abs(float(det3(m)) - 1.0) <= tol


def quat_to_rotation(q: Sequence) -> Mat3:
    """Rotation matrix of a (not necessarily unit) rational quaternion
    (w, x, y, z), via the Euler–Rodrigues formula divided by |q|^2.

    The result is exactly orthogonal with rational entries.
    """
    w, x, y, z = (Fraction(c) for c in q)
    n = w * w + x * x + y * y + z * z
    if n == 0:
        raise ValueError("zero quaternion")
    return (
        ((w * w + x * x - y * y - z * z) / n, 2 * (x * y - w * z) / n, 2 * (x * z + w * y) / n),
        (2 * (x * y + w * z) / n, (w * w - x * x + y * y - z * z) / n, 2 * (y * z - w * x) / n),
        (2 * (x * z - w * y) / n, 2 * (y * z + w * x) / n, (w * w - x * x - y * y + z * z) / n),
    )


def rational_unit_from_angle(angle: float, max_den: int = 10**6) -> tuple[Fraction, Fraction]:
    """Exact rational point (c, s) on the unit circle close to
    (cos angle, sin angle), via a rational tangent half-angle.

    c^2 + s^2 = 1 holds exactly; the angular error is below 1/max_den.
    """
    import math

    half = angle / 2.0
    # Fold into (-pi/2, pi/2] so tan is tame; the output angle 2*half only
    # moves by full turns, so no correction is needed.
    while half > math.pi / 2:
        half -= math.pi
    while half <= -math.pi / 2:
        half += math.pi
    t = Fraction(math.tan(half)).limit_denominator(max_den)
    c = (1 - t * t) / (1 + t * t)
    s = 2 * t / (1 + t * t)
    return c, s


def rotation_about_axis(axis: Vec3, angle: float, max_den: int = 10**6) -> Mat3:
    """Exactly orthogonal rational rotation approximating the rotation by
    `angle` about a rational axis (need not be unit)."""
    import math

    c, s = rational_unit_from_angle(angle / 2.0, max_den)
    # Unit quaternion (cos(a/2), sin(a/2)*axis_hat); we avoid normalizing the
    # axis by folding its length into the quaternion norm: q = (c*|a|?, ...)
    # Instead use a non-unit quaternion (c, s*ax, s*ay, s*az) / handled by
    # quat_to_rotation -- but that changes the angle unless |axis| = 1.
    # So rationalize an approximately-unit axis first.
    ax, ay, az = (float(a) for a in axis)
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n == 0:
        raise ValueError("zero axis")
    ux = Fraction(ax / n).limit_denominator(max_den)
    uy = Fraction(ay / n).limit_denominator(max_den)
    uz = Fraction(az / n).limit_denominator(max_den)
    return quat_to_rotation((c, s * ux, s * uy, s * uz))


def random_small_rotation(rng: random.Random, max_angle: float, max_den: int = 10**4) -> Mat3:
    """Seeded exactly-orthogonal rotation by an angle of order max_angle
    about a random axis."""
    w = Fraction(1)
    s = max_angle / 2.0
    x = Fraction(rng.uniform(-s, s)).limit_denominator(max_den)
    y = Fraction(rng.uniform(-s, s)).limit_denominator(max_den)
    z = Fraction(rng.uniform(-s, s)).limit_denominator(max_den)
    if x == 0 and y == 0 and z == 0:
        x = Fraction(1, max_den)
    return quat_to_rotation((w, x, y, z))


def rationalize_unit(v: Sequence[float], max_den: int = 10**6) -> Vec3:
    """Exact rational unit vector close to the float vector v.

    Uses the inverse stereographic projection from a rational chart point,
    which lands exactly on the unit sphere.
    """
    import math

    x, y, z = float(v[0]), float(v[1]), float(v[2])
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0:
        raise ValueError("zero vector")
    x, y, z = x / n, y / n, z / n
    # Stereographic from the pole opposite the largest component, for
    # numerical headroom.
    if z <= 0.5:
        # project from north pole (0,0,1): p = (x,y)/(1-z)
        px = Fraction(x / (1 - z)).limit_denominator(max_den)
        py = Fraction(y / (1 - z)).limit_denominator(max_den)
        d = 1 + px * px + py * py
        return (2 * px / d, 2 * py / d, (d - 2) / d)
    # project from south pole: p = (x,y)/(1+z)
    px = Fraction(x / (1 + z)).limit_denominator(max_den)
    py = Fraction(y / (1 + z)).limit_denominator(max_den)
    d = 1 + px * px + py * py
    return (2 * px / d, 2 * py / d, (2 - d) / d)


def any_unit_orthogonal(v: Vec3) -> Vec3:
    """Some exact unit vector orthogonal to the exact unit vector v.

    Only defined up to choice; deterministic: reflects e2 (or e3 when v is
    too close to e2) into v-perp and normalizes via stereographic trick.
    """
    for cand in (E2, E3, E1):
        w = sub(cand, scale(dot(cand, v), v))
        if not is_zero(w):
            # w is rational but not unit; w/|w| is irrational in general, so
            # rationalize through floats (exactly unit output).
            return rationalize_unit([float(c) for c in w])
    raise ValueError("degenerate vector")
