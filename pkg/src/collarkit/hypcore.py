"""Hyperbolic plane primitives in the hyperboloid model and scalar right-triangle trigonometry.

Points live on the upper sheet ``x0^2 - x1^2 - x2^2 = 1``; geodesics are the
intersections of the sheet with planes through the origin, stored by their
unit spacelike normal.  Curvature is normalized to -1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf
HALF_PI = 0.5 * math.pi

# rounding slack absorbed by clamping; anything larger is a genuine domain error
CLAMP_TOL = 1e-8


class HypDomainError(ValueError):
    """Inputs outside the domain where the requested construction exists."""


class DivergentHeightError(HypDomainError):
    """tan(phi) sinh(x) >= 1: the right triangle degenerates to an ideal vertex."""


def mdot(u, v) -> float:
    """Minkowski product -u0 v0 + u1 v1 + u2 v2."""
    return -u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def acosh1p(y: float) -> float:
    """arccosh(1 + y) without cancellation for small y >= 0."""
    if y < 0.0:
        if y < -CLAMP_TOL:
            raise HypDomainError(f"arccosh argument 1{y:+.3e} below 1")
        return 0.0
    return math.log1p(y + math.sqrt(y * (2.0 + y)))


def _clamped_acosh(x: float) -> float:
    return acosh1p(x - 1.0)


def _clamped_unit(x: float) -> float:
    if x > 1.0:
        if x - 1.0 > CLAMP_TOL:
            raise HypDomainError(f"cosine {x!r} exceeds 1")
        return 1.0
    if x < -1.0:
        if -1.0 - x > CLAMP_TOL:
            raise HypDomainError(f"cosine {x!r} below -1")
        return -1.0
    return x


@dataclass(frozen=True)
class HypPoint:
    x0: float
    x1: float
    x2: float

    def __post_init__(self):
        q = self.x0 * self.x0 - self.x1 * self.x1 - self.x2 * self.x2
        if self.x0 < 1.0 - 1e-12 or abs(q - 1.0) > 1e-12 * max(1.0, self.x0 * self.x0):
            raise HypDomainError(f"({self.x0}, {self.x1}, {self.x2}) is not on the hyperboloid")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2])

    @classmethod
    def from_vec(cls, v) -> "HypPoint":
        # re-project onto the sheet to keep the invariant under accumulated rounding
        x1, x2 = float(v[1]), float(v[2])
        return cls(math.sqrt(1.0 + x1 * x1 + x2 * x2), x1, x2)

    @classmethod
    def from_polar(cls, radius: float, angle: float) -> "HypPoint":
        """Point at hyperbolic distance ``radius`` from the origin in direction ``angle``."""
        s = math.sinh(radius)
        return cls.from_vec((0.0, s * math.cos(angle), s * math.sin(angle)))

    @classmethod
    def from_disk(cls, z: complex) -> "HypPoint":
        n = abs(z) ** 2
        if n >= 1.0:
            raise HypDomainError("disk point must satisfy |z| < 1")
        return cls.from_vec((0.0, 2.0 * z.real / (1.0 - n), 2.0 * z.imag / (1.0 - n)))

    def to_disk(self) -> complex:
        return complex(self.x1, self.x2) / (1.0 + self.x0)


ORIGIN = HypPoint(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class HypGeodesic:
    """Complete geodesic ``{x : <x, normal> = 0}``."""

    normal: tuple

    def __post_init__(self):
        n = self.normal
        if abs(mdot(n, n) - 1.0) > 1e-12:
            raise HypDomainError("geodesic normal must have Minkowski norm +1")

    @classmethod
    def from_normal(cls, v) -> "HypGeodesic":
        v = np.asarray(v, dtype=float)
        nn = mdot(v, v)
        if nn <= 0.0:
            raise HypDomainError("normal vector must be spacelike")
        return cls(tuple(float(c) for c in v / math.sqrt(nn)))

    @classmethod
    def through(cls, p: HypPoint, q: HypPoint) -> "HypGeodesic":
        if p == q:
            raise HypDomainError("two distinct points are needed")
        return cls.from_normal(lorentz_cross(p.vec, q.vec))

    @classmethod
    def from_direction(cls, p: HypPoint, tangent) -> "HypGeodesic":
        return cls.from_normal(lorentz_cross(p.vec, np.asarray(tangent, dtype=float)))

    def contains(self, p: HypPoint, tol: float = 1e-10) -> bool:
        return abs(mdot(p.vec, self.normal)) <= tol * max(1.0, p.x0)


def lorentz_cross(u, v) -> np.ndarray:
    """Vector w with <w, u> = <w, v> = 0 in the Minkowski product."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = np.cross(u, v)
    return np.array([-c[0], c[1], c[2]])


def hyp_distance(p: HypPoint, q: HypPoint) -> float:
    """Hyperbolic distance; switches to the chordal form for nearby points."""
    d = p.vec - q.vec
    chord2 = mdot(d, d)
    if chord2 < 4.0:
        # <p-q, p-q> = 4 sinh^2(dist/2), stable when p and q are close
        return 2.0 * math.asinh(0.5 * math.sqrt(max(chord2, 0.0)))
    return _clamped_acosh(-mdot(p.vec, q.vec))


def tangent_towards(p: HypPoint, q: HypPoint) -> np.ndarray:
    """Unit tangent vector at p of the geodesic from p to q."""
    v = q.vec + mdot(p.vec, q.vec) * p.vec
    n = math.sqrt(max(mdot(v, v), 0.0))
    if n == 0.0:
        raise HypDomainError("direction to a coincident point is undefined")
    return v / n


def exp_map(p: HypPoint, tangent, t: float) -> HypPoint:
    """Point at arc length t along the geodesic from p with unit tangent ``tangent``."""
    return HypPoint.from_vec(math.cosh(t) * p.vec + math.sinh(t) * np.asarray(tangent))


def angle_between(u, v) -> float:
    """Angle between two tangent vectors at the same point."""
    nu = math.sqrt(mdot(u, u))
    nv = math.sqrt(mdot(v, v))
    c = mdot(u, v) / (nu * nv)
    return math.acos(_clamped_unit(c))


def perpendicular_foot(p: HypPoint, g: HypGeodesic) -> tuple[HypPoint, float]:
    """Closest point of ``g`` to ``p`` and the distance between them."""
    s = mdot(p.vec, g.normal)
    if s == 0.0:
        return p, 0.0
    n = np.asarray(g.normal)
    foot = HypPoint.from_vec((p.vec - s * n) / math.sqrt(1.0 + s * s))
    return foot, math.asinh(abs(s))


@dataclass(frozen=True)
class HypTriangle:
    """Right-angled (gamma = pi/2) or general hyperbolic triangle.

    Infinite sides are ``math.inf`` and always come with ``open_ended=True``
    and a zero angle at the ideal vertex.
    """

    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float = HALF_PI
    open_ended: bool = False

    def residuals(self) -> list[float]:
        """Law-of-cosines residuals at the three corners (finite triangles only)."""
        if self.open_ended:
            return []
        a, b, c = self.a, self.b, self.c
        return [
            math.cosh(c) - (math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * math.cos(self.gamma)),
            math.cosh(a) - (math.cosh(b) * math.cosh(c) - math.sinh(b) * math.sinh(c) * math.cos(self.alpha)),
            math.cosh(b) - (math.cosh(a) * math.cosh(c) - math.sinh(a) * math.sinh(c) * math.cos(self.beta)),
        ]


_RIGHT_KEYS = ("a", "b", "c", "alpha", "beta")


def _legs(a: float, b: float) -> HypTriangle:
    # 2 sinh^2(x/2) = cosh x - 1
    ha, hb = math.sinh(0.5 * a), math.sinh(0.5 * b)
    c = acosh1p(2.0 * ha * ha * math.cosh(b) + 2.0 * hb * hb)
    alpha = math.atan2(math.tanh(a), math.sinh(b))
    beta = math.atan2(math.tanh(b), math.sinh(a))
    return HypTriangle(a, b, c, alpha, beta)


def _open(a=INF, b=INF, alpha=0.0, beta=0.0) -> HypTriangle:
    return HypTriangle(a, b, INF, alpha, beta, HALF_PI, True)


def _leg_hyp(leg: float, c: float) -> float:
    """Other leg from one leg and the hypotenuse."""
    if c < leg:
        if leg - c > CLAMP_TOL:
            raise HypDomainError(f"hypotenuse c={c} shorter than leg {leg}")
        return 0.0
    y = 2.0 * math.sinh(0.5 * (c + leg)) * math.sinh(0.5 * (c - leg)) / math.cosh(leg)
    return acosh1p(y)


def _check_acute(name: str, x: float) -> None:
    if not 0.0 < x < HALF_PI:
        raise HypDomainError(f"{name}={x} must lie in (0, pi/2) for a right triangle")


def solve_right_triangle(**known: float) -> HypTriangle:
    """Solve the right triangle (right angle between legs a and b) from two known quantities.

    Accepts exactly two of ``a, b, c, alpha, beta``; alpha is opposite a and
    beta opposite b.  A leg plus the adjacent angle past the divergence
    threshold ``tan(angle) sinh(leg) >= 1`` yields an open-ended triangle.
    """
    keys = tuple(k for k in _RIGHT_KEYS if k in known)
    extra = set(known) - set(_RIGHT_KEYS)
    if extra or len(keys) != 2 or len(known) != 2:
        raise HypDomainError(f"need exactly two of {_RIGHT_KEYS}, got {sorted(known)}")
    v = {k: float(known[k]) for k in keys}
    for k in ("a", "b", "c"):
        if k in v and not v[k] >= 0.0:
            raise HypDomainError(f"{k}={v[k]} must be a nonnegative length")

    if keys == ("a", "b"):
        return _legs(v["a"], v["b"])
    if keys == ("a", "c"):
        return _legs(v["a"], _leg_hyp(v["a"], v["c"]))
    if keys == ("b", "c"):
        return _legs(_leg_hyp(v["b"], v["c"]), v["b"])
    if keys == ("a", "beta"):
        a, beta = v["a"], v["beta"]
        _check_acute("beta", beta)
        t = math.tan(beta) * math.sinh(a)
        if t >= 1.0:
            return _open(a=a, b=INF, alpha=0.0, beta=beta)
        return _legs(a, math.atanh(t))
    if keys == ("b", "alpha"):
        b, alpha = v["b"], v["alpha"]
        _check_acute("alpha", alpha)
        t = math.tan(alpha) * math.sinh(b)
        if t >= 1.0:
            return _open(a=INF, b=b, alpha=alpha, beta=0.0)
        return _legs(math.atanh(t), b)
    if keys == ("a", "alpha"):
        a, alpha = v["a"], v["alpha"]
        _check_acute("alpha", alpha)
        # tan(alpha) = tanh(a) / sinh(b)
        return _legs(a, math.asinh(math.tanh(a) / math.tan(alpha)))
    if keys == ("b", "beta"):
        b, beta = v["b"], v["beta"]
        _check_acute("beta", beta)
        return _legs(math.asinh(math.tanh(b) / math.tan(beta)), b)
    if keys == ("c", "alpha"):
        c, alpha = v["c"], v["alpha"]
        _check_acute("alpha", alpha)
        return _legs(math.asinh(math.sinh(c) * math.sin(alpha)), math.atanh(math.cos(alpha) * math.tanh(c)))
    if keys == ("c", "beta"):
        c, beta = v["c"], v["beta"]
        _check_acute("beta", beta)
        return _legs(math.atanh(math.cos(beta) * math.tanh(c)), math.asinh(math.sinh(c) * math.sin(beta)))
    # (alpha, beta): needs alpha + beta < pi/2
    alpha, beta = v["alpha"], v["beta"]
    _check_acute("alpha", alpha)
    _check_acute("beta", beta)
    deficit = HALF_PI - alpha - beta
    if deficit <= 0.0:
        raise HypDomainError(f"alpha + beta = {alpha + beta} must be < pi/2")
    # cos(alpha) - sin(beta) = 2 sin((pi/2 + alpha - beta)/2) sin(deficit/2)
    ya = 2.0 * math.sin(0.5 * (HALF_PI + alpha - beta)) * math.sin(0.5 * deficit) / math.sin(beta)
    yb = 2.0 * math.sin(0.5 * (HALF_PI + beta - alpha)) * math.sin(0.5 * deficit) / math.sin(alpha)
    return _legs(acosh1p(ya), acosh1p(yb))


def bh(phi: float, x: float) -> float:
    """Height over a leg of length x for adjacent angle phi: arctanh(tan(phi) sinh(x))."""
    if not 0.0 <= phi < HALF_PI or x < 0.0:
        raise HypDomainError(f"BH needs 0 <= phi < pi/2 and x >= 0 (got phi={phi}, x={x})")
    t = math.tan(phi) * math.sinh(x)
    if t >= 1.0:
        raise DivergentHeightError(f"tan(phi) sinh(x) = {t} >= 1: height diverges")
    return math.atanh(t)


def beta_inf(x: float) -> float:
    """Critical angle arctan(1/sinh x); pi/2 at x = 0 by continuity."""
    if x < 0.0:
        raise HypDomainError(f"x={x} must be nonnegative")
    if x == 0.0:
        return HALF_PI
    if math.isinf(x):
        return 0.0
    return math.atan2(1.0, math.sinh(x))


def law_of_cosines(a: float, b: float, gamma: float) -> float:
    """Side opposite gamma in the triangle with adjacent sides a and b."""
    if a < 0.0 or b < 0.0 or not 0.0 <= gamma <= math.pi:
        raise HypDomainError("law_of_cosines needs a, b >= 0 and 0 <= gamma <= pi")
    # cosh c - 1 = cosh(a - b) - 1 + sinh a sinh b (1 - cos gamma)
    h = math.sinh(0.5 * (a - b))
    y = 2.0 * h * h + math.sinh(a) * math.sinh(b) * 2.0 * math.sin(0.5 * gamma) ** 2
    return acosh1p(y)


def angle_from_sides(a: float, b: float, c: float) -> float:
    """Angle opposite c in the hyperbolic triangle with sides a, b, c."""
    if not (a > 0 and b > 0 and c >= 0):
        raise HypDomainError("sides must be positive")
    if c >= a + b or a >= b + c or b >= a + c:
        raise HypDomainError(f"sides ({a}, {b}, {c}) violate the strict triangle inequality")
    # 1 - cos(gamma) = (cosh c - cosh(a - b)) / (sinh a sinh b)
    num = 2.0 * math.sinh(0.5 * (c + a - b)) * math.sinh(0.5 * (c - a + b))
    ratio = num / (math.sinh(a) * math.sinh(b))  # = 2 sin^2(gamma/2)
    s = math.sqrt(max(0.5 * ratio, 0.0))
    return 2.0 * math.asin(min(s, 1.0))


def pentagon_four_right(a1: float, a2: float, alpha_bar: float) -> float:
    """Side a4 of the pentagon with four right angles: cosh a4 = sinh a1 sinh a2 / sin alpha_bar."""
    if not 0.0 < alpha_bar < math.pi:
        raise HypDomainError("alpha_bar must lie in (0, pi)")
    prod = math.sinh(a1) * math.sinh(a2)
    s = math.sin(alpha_bar)
    if prod < s * (1.0 - 1e-15):
        raise HypDomainError(f"infeasible pentagon: sinh a1 sinh a2 = {prod} < sin(alpha) = {s}")
    return _clamped_acosh(max(prod / s, 1.0))
