"""Hyperbolic comparison triangles and the flip-flop perpendicular procedure.

The comparison objects are the model-space side of the triangle
inequalities: angles from ``toponogov_a`` are lower bounds for the angles of
a surface triangle with the same sides (curvature >= -1), and the side from
``toponogov_b`` is an upper bound for the third side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .hypcore import (
    HALF_PI,
    INF,
    HypDomainError,
    HypGeodesic,
    HypPoint,
    angle_between,
    angle_from_sides,
    beta_inf,
    bh,
    exp_map,
    hyp_distance,
    law_of_cosines,
    lorentz_cross,
    mdot,
    perpendicular_foot,
    solve_right_triangle,
    tangent_towards,
)


@dataclass(frozen=True)
class ComparisonTriangleA:
    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class ComparisonTriangleB:
    a: float
    b: float
    gamma: float
    c: float


def toponogov_a(a: float, b: float, c: float) -> ComparisonTriangleA:
    """Hyperbolic triangle with the given sides; its angles are the lower comparison angles."""
    if not (a < b + c and b < a + c and c < a + b):
        raise HypDomainError(f"sides ({a}, {b}, {c}) violate the strict triangle inequality")
    return ComparisonTriangleA(
        a, b, c,
        alpha=angle_from_sides(b, c, a),
        beta=angle_from_sides(a, c, b),
        gamma=angle_from_sides(a, b, c),
    )


def toponogov_b(a: float, b: float, gamma: float) -> ComparisonTriangleB:
    """Hinge comparison: the side opposite gamma, an upper bound for the surface side."""
    if not (a > 0.0 and b > 0.0 and 0.0 < gamma < math.pi):
        raise HypDomainError("need a, b > 0 and 0 < gamma < pi")
    return ComparisonTriangleB(a, b, gamma, law_of_cosines(a, b, gamma))


@dataclass(frozen=True)
class RightComparison:
    """Right triangle in the model plane; legs a, b, hypotenuse c, alpha opposite a."""

    a: float
    b: float
    c: float
    alpha: float
    beta: float
    open_ended: bool = False


def _from_tri(t) -> RightComparison:
    return RightComparison(t.a, t.b, t.c, t.alpha, t.beta, t.open_ended)


def compare_right_legs(a: float, b: float) -> RightComparison:
    """Case a' = a, b' = b: alpha' <= alpha, beta' <= beta, c' >= c."""
    if not (a > 0.0 and b > 0.0):
        raise HypDomainError("legs must be positive")
    return _from_tri(solve_right_triangle(a=a, b=b))


def compare_right_leg_angle(a: float, beta: float) -> RightComparison:
    """Case a' = a, beta' = beta: alpha' <= alpha, b' >= b, c' >= c.

    Past the divergence threshold the comparison triangle is open-ended
    (b' = c' = inf, alpha' = 0), which makes the comparisons trivially true.
    """
    if not (a > 0.0 and 0.0 < beta < HALF_PI):
        raise HypDomainError("need a > 0 and 0 < beta < pi/2")
    # same product as in bh, so rounding cannot put the two tests on different sides
    if math.tan(beta) * math.sinh(a) >= 1.0:
        return RightComparison(a, INF, INF, 0.0, beta, True)
    b = bh(beta, a)
    t = solve_right_triangle(a=a, b=b)
    return RightComparison(a, b, t.c, t.alpha, beta)


def compare_right_opposite(b: float, beta: float) -> RightComparison:
    """Case b' = b, beta' = beta: alpha' <= alpha and a' <= a (no claim about c')."""
    if not (b > 0.0 and 0.0 < beta < HALF_PI):
        raise HypDomainError("need b > 0 and 0 < beta < pi/2")
    a = math.asinh(math.tanh(b) / math.tan(beta))
    cos_alpha = math.cosh(a) * math.sin(beta)
    # cosh(a) sin(beta) = cos(alpha) is < 1 on the whole domain
    assert cos_alpha < 1.0 + 1e-12, cos_alpha
    t = solve_right_triangle(a=a, b=b)
    return RightComparison(a, b, t.c, t.alpha, beta)


def compare_right_hypotenuse(beta: float, *, c: float | None = None, b: float | None = None) -> RightComparison:
    """Comparison for a right triangle whose leg b is a shortest connection to side a.

    With ``c`` given: b' >= b and a' <= a.  With ``b`` given: c' <= c and a' <= a.
    """
    if not 0.0 < beta < HALF_PI:
        raise HypDomainError(f"beta={beta} must be acute")
    if (c is None) == (b is None):
        raise HypDomainError("give exactly one of c or b")
    if c is not None:
        if not c > 0.0:
            raise HypDomainError("c must be positive")
        bp = math.asinh(math.sin(beta) * math.sinh(c))
        ap = math.atanh(math.cos(beta) * math.tanh(c))
        t = solve_right_triangle(a=ap, b=bp)
        return RightComparison(ap, bp, c, t.alpha, beta)
    if not b > 0.0:
        raise HypDomainError("b must be positive")
    cp = math.asinh(math.sinh(b) / math.sin(beta))
    ap = math.atanh(math.cos(beta) * math.tanh(cp))
    t = solve_right_triangle(a=ap, b=b)
    return RightComparison(ap, b, cp, t.alpha, beta)


def open_triangle_angle_bound(a_len: float) -> float:
    """Lower bound on the acute angle of an open-ended triangle with finite side a_len and a right angle."""
    if not a_len > 0.0:
        raise HypDomainError("a_len must be positive")
    return beta_inf(a_len)


def open_triangle_finite_bound(a_len: float, t: float) -> float:
    """arctan(tanh(t - a)/sinh(a)), the finite-t approximation of the open-triangle bound."""
    if t < a_len:
        raise HypDomainError("t must be at least a_len")
    return math.atan2(math.tanh(t - a_len), math.sinh(a_len))


# ---------------------------------------------------------------------------
# flip-flop procedure in the hyperbolic plane


class RayRelation(str, Enum):
    ULTRAPARALLEL = "ultraparallel"
    ASYMPTOTIC = "asymptotic"
    INTERSECTING = "intersecting"


@dataclass(frozen=True)
class Ray:
    origin: HypPoint
    tangent: tuple

    @property
    def line(self) -> HypGeodesic:
        return HypGeodesic.from_direction(self.origin, self.tangent)

    def param(self, p: HypPoint) -> float:
        """Signed arc-length parameter of a point on the supporting line."""
        return math.asinh(mdot(p.vec, np.asarray(self.tangent)))

    def at(self, s: float) -> HypPoint:
        return exp_map(self.origin, self.tangent, s)


@dataclass(frozen=True)
class OpenTriangleConfig:
    """Open-ended triangle: finite side q-r, ray c from q, ray b from r.

    ``angle_q`` and ``angle_r`` are the interior angles between the finite
    side and the rays; both must be acute.
    """

    a_len: float
    angle_q: float
    angle_r: float
    label: str = ""

    def build(self) -> tuple[HypPoint, HypPoint, Ray, Ray]:
        if not (self.a_len > 0.0 and 0.0 < self.angle_q < HALF_PI and 0.0 < self.angle_r < HALF_PI):
            raise HypDomainError("open triangle needs a_len > 0 and acute angles at q and r")
        # q at the origin, r along the x1 axis; both rays leave into x2 > 0
        q = HypPoint(1.0, 0.0, 0.0)
        r = HypPoint.from_polar(self.a_len, 0.0)
        tq = np.array([0.0, math.cos(self.angle_q), math.sin(self.angle_q)])
        # rotate the direction r->q by angle_r towards the x2 > 0 side
        toward_q = tangent_towards(r, q)
        normal_r = lorentz_cross(r.vec, toward_q)
        normal_r = normal_r / math.sqrt(mdot(normal_r, normal_r))
        if mdot(normal_r, np.array([0.0, 0.0, 1.0])) < 0.0:
            normal_r = -normal_r
        tr = math.cos(self.angle_r) * toward_q + math.sin(self.angle_r) * normal_r
        return q, r, Ray(q, tuple(tq)), Ray(r, tuple(tr))


def ray_relation(ray1: Ray, ray2: Ray, tol: float = 1e-12) -> tuple[RayRelation, HypPoint | None]:
    """Classify the supporting lines; report the crossing point if the forward rays meet."""
    w = lorentz_cross(np.asarray(ray1.line.normal), np.asarray(ray2.line.normal))
    ww = mdot(w, w)
    scale = max(1.0, float(np.abs(w).max()) ** 2)
    if abs(ww) <= tol * scale:
        return RayRelation.ASYMPTOTIC, None
    if ww > 0.0:
        return RayRelation.ULTRAPARALLEL, None
    x = w / math.sqrt(-ww)
    if x[0] < 0:
        x = -x
    p = HypPoint.from_vec(x)
    if ray1.param(p) > 0.0 and ray2.param(p) > 0.0:
        return RayRelation.INTERSECTING, p
    # lines cross behind one of the origins: forward rays stay disjoint
    return RayRelation.ULTRAPARALLEL, None


@dataclass(frozen=True)
class FlipFlopState:
    j: int
    s: float
    phi: float
    start: HypPoint
    foot: HypPoint
    on_ray: str  # ray containing the start point


@dataclass
class FlipFlopRun:
    config: OpenTriangleConfig
    relation: RayRelation
    states: list = field(default_factory=list)
    converged: bool = False

    @property
    def final_error(self) -> float:
        return abs(self.states[-1].phi - HALF_PI) if self.states else math.nan


class FlipFlopConfigError(HypDomainError):
    pass


def run_flip_flop(config: OpenTriangleConfig, max_steps: int = 10_000, tol: float = 1e-6) -> FlipFlopRun:
    """Alternate shortest perpendiculars between the two rays of an open-ended triangle.

    Step j starts on ray b for odd j and on ray c for even j, drops the
    perpendicular to the other ray and records its length s_j and the
    outward angle phi_j at its start.  Stops once |phi_j - pi/2| < tol.
    Non-convergence is reported through ``converged``, not raised.
    """
    q, r, ray_c, ray_b = config.build()
    relation, hit = ray_relation(ray_c, ray_b)
    if relation is RayRelation.INTERSECTING:
        raise FlipFlopConfigError(f"rays meet at distance {hyp_distance(q, hit):.6g} from q: not an open-ended triangle")
    # each step works in a frame centred at the current point, so every
    # Minkowski product stays O(1); ``to_input`` maps back for reporting
    normals = {"b": np.asarray(ray_b.line.normal), "c": np.asarray(ray_c.line.normal)}
    # orientation: forward tangent at x is sign * (x cross normal), normalized
    orient = {k: _orientation(ray.origin, normals[k], ray.tangent) for k, ray in (("b", ray_b), ("c", ray_c))}
    last = {"b": r.vec, "c": q.vec}
    pos = {"b": 0.0, "c": 0.0}
    to_input = np.eye(3)
    run = FlipFlopRun(config, relation)
    cur, where = r.vec, "b"
    for j in range(1, max_steps + 1):
        boost = _boost_to_origin(cur)
        inv = _boost_inverse(boost)
        to_input = to_input @ inv
        normals = {k: _renormalize(boost @ v) for k, v in normals.items()}
        last = {k: boost @ v for k, v in last.items()}
        p = HypPoint(1.0, 0.0, 0.0)
        other = "c" if where == "b" else "b"
        foot, s = perpendicular_foot(p, HypGeodesic(tuple(normals[other])))
        pos[other] += _signed_step(HypPoint.from_vec(last[other]), foot, normals[other], orient[other])
        if pos[other] < -1e-12:
            raise FlipFlopConfigError(f"step {j}: perpendicular foot falls behind the origin of ray {other}")
        out = _forward_tangent(p.vec, normals[where], orient[where])
        phi = angle_between(_towards_line(p, HypGeodesic(tuple(normals[other]))), out) if s > 0.0 else HALF_PI
        run.states.append(FlipFlopState(j, s, phi, _move(p, to_input), _move(foot, to_input), where))
        if abs(phi - HALF_PI) < tol:
            run.converged = True
            break
        last[other] = foot.vec
        cur, where = foot.vec, other
    return run


def _renormalize(n: np.ndarray) -> np.ndarray:
    return n / math.sqrt(mdot(n, n))


def _forward_tangent(x: np.ndarray, normal: np.ndarray, sign: float) -> np.ndarray:
    t = lorentz_cross(x, normal)
    return sign * t / math.sqrt(mdot(t, t))


def _orientation(origin: HypPoint, normal: np.ndarray, tangent) -> float:
    return 1.0 if mdot(_forward_tangent(origin.vec, normal, 1.0), np.asarray(tangent)) > 0.0 else -1.0


def _signed_step(a: HypPoint, b: HypPoint, normal: np.ndarray, sign: float) -> float:
    # signed arc length from a to b along the oriented line
    d = hyp_distance(a, b)
    if d == 0.0:
        return 0.0
    return math.copysign(d, mdot(b.vec, _forward_tangent(a.vec, normal, sign)))


def _towards_line(p: HypPoint, g: HypGeodesic) -> np.ndarray:
    # unit tangent at p pointing to its foot on g: minus the tangential part of the normal
    n = np.asarray(g.normal)
    sp = mdot(p.vec, n)
    nt = n + sp * p.vec
    return -math.copysign(1.0, sp) * nt / math.sqrt(1.0 + sp * sp)


def _boost_to_origin(x: np.ndarray) -> np.ndarray:
    """Lorentz matrix sending the hyperboloid point x to (1, 0, 0)."""
    x0, x1, x2 = x
    f = 1.0 / (1.0 + x0)
    return np.array([
        [x0, -x1, -x2],
        [-x1, 1.0 + x1 * x1 * f, x1 * x2 * f],
        [-x2, x1 * x2 * f, 1.0 + x2 * x2 * f],
    ])


def _boost_inverse(m: np.ndarray) -> np.ndarray:
    # a pure boost is inverted by flipping the sign of its velocity
    inv = m.copy()
    inv[0, 1:] *= -1.0
    inv[1:, 0] *= -1.0
    return inv


def _move(p: HypPoint, m: np.ndarray) -> HypPoint:
    return HypPoint.from_vec(m @ p.vec)


def _sine_ratio_angle(s_k: float, s_next: float) -> float:
    """arcsin(min(1, sinh s_next / sinh s_k)) without the cancellation of arcsin near 1."""
    if s_k <= 0.0 or s_next >= s_k:
        return HALF_PI
    # 1 - sinh(s_next)/sinh(s_k) written as a product
    one_minus = 2.0 * math.cosh(0.5 * (s_k + s_next)) * math.sinh(0.5 * (s_k - s_next)) / math.sinh(s_k)
    return HALF_PI - 2.0 * math.asin(math.sqrt(0.5 * one_minus))


def flip_flop_bounds(run: FlipFlopRun) -> list[tuple[float, float, float]]:
    """Per-step (phi_j, sine-ratio bound, critical-angle bound) for steps with a successor."""
    out = []
    st = run.states
    for k in range(len(st) - 1):
        s_k, s_next = st[k].s, st[k + 1].s
        out.append((st[k].phi, _sine_ratio_angle(s_k, s_next), beta_inf(s_k)))
    return out


def asymptotic_angle(a_len: float, angle_q: float) -> float:
    """Angle at r for which ray b shares its ideal endpoint with ray c.

    Solves cosh(a) sin(A) sin(B) - cos(A) cos(B) = 1 for B, the angle
    relation of a triangle with one ideal vertex.  Needs angle_q > betaInf(a_len)
    for the answer to be acute.
    """
    ch, sa, ca = math.cosh(a_len), math.sin(angle_q), math.cos(angle_q)
    amp = math.hypot(ch * sa, ca)
    return math.atan2(ca, ch * sa) + math.asin(1.0 / amp)


def asymptotic_config(a_len: float, angle_q: float) -> OpenTriangleConfig:
    ang = asymptotic_angle(a_len, angle_q)
    if not ang < HALF_PI:
        raise HypDomainError(f"angle_q={angle_q} must exceed betaInf({a_len}) for acute asymptotic rays")
    return OpenTriangleConfig(a_len, angle_q, ang, "asymptotic")


def ultraparallel_config(a_len: float, angle_q: float, t: float, label: str = "ultraparallel") -> OpenTriangleConfig:
    """Angle at r a fraction t of the way from the asymptotic angle to pi/2.

    Small t puts the common perpendicular far out and makes it short, so the
    feet travel a long way before the angles settle.
    """
    ang = asymptotic_angle(a_len, angle_q)
    return OpenTriangleConfig(a_len, angle_q, ang + t * (HALF_PI - ang), label)


def flip_flop_suite() -> list[OpenTriangleConfig]:
    """Twenty configurations: mirror-symmetric, ultraparallel with a near or far perpendicular, asymptotic."""
    cfgs = []
    for a_len, ang in [(0.5, 1.45), (1.0, 1.2), (1.5, 1.0), (2.0, 1.3)]:
        cfgs.append(OpenTriangleConfig(a_len, ang, ang, "symmetric"))
    for a_len, aq, t in [(0.8, 1.1, 0.5), (1.2, 0.9, 0.3), (2.0, 0.5, 0.6), (0.6, 1.4, 0.2),
                         (1.0, 0.9, 0.8), (2.5, 0.3, 0.4), (1.7, 1.2, 0.1), (3.0, 0.2, 0.5)]:
        cfgs.append(ultraparallel_config(a_len, aq, t))
    for a_len, aq in [(0.9, 1.0), (1.3, 0.8), (2.2, 0.5), (3.0, 0.3)]:
        cfgs.append(ultraparallel_config(a_len, aq, 0.01, "divergent"))
    for a_len, aq in [(1.0, 1.0), (0.5, 1.3), (2.0, 0.4), (1.5, 0.7)]:
        cfgs.append(asymptotic_config(a_len, aq))
    return cfgs
