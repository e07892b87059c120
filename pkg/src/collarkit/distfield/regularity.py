"""Local regularity of level curves and the open right-angled quadrilateral inequality."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from ..surface.geodesic import direction_of, geodesic_shoot, minimal_connections, shoot_batch
from ..surface.metric import FermiMetric
from .eikonal import DistanceField
from .levels import COMPACT, LevelCurve


@dataclass(frozen=True)
class TangentReport:
    checked: int
    skipped_cut: int  # vertices whose connection is not unique (cut-locus flag set)
    median_error: float  # median |angle(chord, connection) - pi/2|
    max_error: float
    errors: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class LipschitzReport:
    max_ratio: float
    ratios: np.ndarray  # worst chord ratio per checked vertex
    tangent: TangentReport
    vertices: int


def _near_cut(f: DistanceField, r, t) -> np.ndarray:
    n_r, n_t = f.shape
    i = np.clip(np.floor(r / f.h_r).astype(int), 0, n_r - 2)
    j = np.floor(np.mod(t, f.metric.boundary_length) / f.h_t).astype(int) % n_t
    j1 = (j + 1) % n_t
    c = f.cut
    return c[i, j] | c[i + 1, j] | c[i, j1] | c[i + 1, j1]


def lipschitz_check(curve: LevelCurve, m: FermiMetric, f: DistanceField, max_vertices: int = 96,
                    window: tuple[float, float] = (2.0, 10.0)) -> LipschitzReport:
    """Slope of the curve as a graph over the direction orthogonal to its minimal connections.

    At a vertex p with minimal connection leaving in the unit direction u,
    nearby vertices q are expressed in the orthonormal frame at p as
    x (across u) and y (along u), from the metric displacement
    (A dr, G dt).  The ratio |y| / |x| is taken over chords with
    |x| in window * hR.  The tangent error compares a symmetric chord with
    the direction orthogonal to u, at vertices away from the cut locus.
    """
    if curve.component_class == COMPACT:
        raise ValueError("curve must bound the infinite component")
    r = curve.r[:-1] if curve.closed else curve.r
    t = curve.theta[:-1] if curve.closed else curve.theta
    n = r.size
    step = max(1, n // max_vertices)
    pick = np.arange(0, n, step)
    lo, hi = window[0] * f.h_r, window[1] * f.h_r
    cut = _near_cut(f, r[pick], t[pick])
    live = pick[(~cut) & (r[pick] < m.r_max - hi)]
    conns = minimal_connections(m, np.column_stack([r[live], t[live]]), field=f)
    ratios = np.full(live.size, np.nan)
    errors = np.full(live.size, np.nan)
    # enough neighbours along the curve to cover the outer window in any direction
    reach = int(np.ceil(3.0 * hi / np.min(f.span_r)) + 4)
    for a, (p, c) in enumerate(zip(live, conns)):
        ur, ut = math.cos(c.direction), math.sin(c.direction)
        jp = m.jet(r[p], t[p])
        off = np.arange(-reach, reach + 1)
        off = off[off != 0]
        q = (p + off) % n
        shift = np.where(p + off >= n, curve.theta[-1] - curve.theta[0], 0.0)
        shift = np.where(p + off < 0, -(curve.theta[-1] - curve.theta[0]), shift)
        dx_r = float(jp.A) * (r[q] - r[p])
        dx_t = float(jp.G) * (t[q] + shift - t[p])
        y = dx_r * ur + dx_t * ut
        x = dx_r * (-ut) + dx_t * ur
        sel = (np.abs(x) >= lo) & (np.abs(x) <= hi)
        if sel.any():
            ratios[a] = float(np.max(np.abs(y[sel]) / np.abs(x[sel])))
        # symmetric chord between the first vertices at least lo away on either side
        dist = np.hypot(dx_r, dx_t)
        fwd = np.nonzero((off > 0) & (dist >= lo))[0]
        bwd = np.nonzero((off < 0) & (dist >= lo))[0]
        if fwd.size and bwd.size:
            i1, i0 = fwd[0], bwd[-1]
            cx, cy = dx_r[i1] - dx_r[i0], dx_t[i1] - dx_t[i0]
            cosang = (cx * ur + cy * ut) / math.hypot(cx, cy)
            errors[a] = abs(math.acos(max(-1.0, min(1.0, cosang))) - 0.5 * math.pi)
    good = errors[np.isfinite(errors)]
    tangent = TangentReport(int(good.size), int(np.count_nonzero(cut)),
                            float(np.median(good)) if good.size else math.nan,
                            float(good.max()) if good.size else math.nan, good)
    finite = ratios[np.isfinite(ratios)]
    return LipschitzReport(float(finite.max()) if finite.size else math.nan, finite, tangent, int(pick.size))


# --- open right-angled quadrilaterals ---------------------------------------


@dataclass(frozen=True)
class Quadrilateral:
    theta1: float
    a1: float  # boundary side, from theta1 to theta1 + a1
    a2: float  # normal side at theta1 + a1
    open_ended: bool
    product: float  # sinh a1 sinh a2


@dataclass(frozen=True)
class QuadrilateralReport:
    samples: list[Quadrilateral]
    extremal: list[Quadrilateral]  # smallest escaping a2 for each sampled a1
    r_max: float

    @property
    def accepted(self) -> list[Quadrilateral]:
        return [q for q in self.samples if q.open_ended]

    @property
    def min_product(self) -> float:
        vals = [q.product for q in self.accepted] + [q.product for q in self.extremal if q.open_ended]
        return min(vals) if vals else math.nan


def _segments_cross(p: np.ndarray, q: np.ndarray) -> bool:
    """Whether polylines p and q (n x 2) properly cross."""
    a, b = p[:-1], p[1:]
    c, d = q[:-1], q[1:]
    A, B = a[:, None, :], b[:, None, :]
    C, D = c[None, :, :], d[None, :, :]

    def orient(u, v, w):
        return (v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1]) - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0])

    d1, d2 = orient(A, B, C), orient(A, B, D)
    d3, d4 = orient(C, D, A), orient(C, D, B)
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def _normal_ray(m: FermiMetric, theta: float, length: float, samples: int = 801):
    return geodesic_shoot(m, (0.0, theta), 0.0, length, samples)


def _ray_budget(m: FermiMetric) -> float:
    return 6.0 * m.r_max + 4.0 * m.boundary_length


def quadrilateral(m: FermiMetric, theta1: float, a1: float, a2: float, a5=None) -> Quadrilateral:
    """Build the right-angled quadrilateral with sides a1 (on the boundary) and a2 (normal at its end).

    The infinite sides are the boundary normal at theta1 and the geodesic
    leaving the top of a2 orthogonally towards theta1; the configuration is
    open-ended when the latter reaches rMax without meeting the former or
    returning to the boundary.
    """
    L = m.boundary_length
    if a5 is None:
        a5 = _normal_ray(m, theta1, _ray_budget(m))
    side = shoot_batch(m, 0.0, theta1 + a1, 0.0, a2)
    top_r, top_t = float(side[0, 0]), float(side[1, 0])
    psi2 = float(direction_of(m, side[0], side[1], side[2], side[3])[0])
    ok = 0.0 < top_r < m.r_max
    if ok:
        a3 = geodesic_shoot(m, (top_r, top_t), psi2 - 0.5 * math.pi, _ray_budget(m), samples=1601)
        ok = a3.truncated and a3.r[-1] > 0.5 * m.r_max
        if ok:
            q = np.column_stack([a3.r, a3.t])
            for shift in (-L, 0.0, L):
                if _segments_cross(q, np.column_stack([a5.r, a5.t + shift])):
                    ok = False
                    break
    return Quadrilateral(theta1, a1, a2, bool(ok), math.sinh(a1) * math.sinh(a2))


def escape_height(m: FermiMetric, theta1: float, a1: float, tol: float = 1e-3, a5=None) -> float:
    """Smallest a2 giving an open-ended quadrilateral (inf if none below the rMax budget)."""
    if a5 is None:
        a5 = _normal_ray(m, theta1, _ray_budget(m))
    hi = 0.9 * m.r_max
    if not quadrilateral(m, theta1, a1, hi, a5).open_ended:
        return math.inf
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if quadrilateral(m, theta1, a1, mid, a5).open_ended:
            hi = mid
        else:
            lo = mid
    return hi


def open_quadrilateral_check(m: FermiMetric, samples: int, seed: int = 0, r_max: float = 12.0,
                             extremal: int = 3) -> QuadrilateralReport:
    """Random right-angled quadrilaterals plus the extremal one for a few boundary sides.

    Rays are followed to ``r_max`` (the metric is extended there) as a stand-in for infinity.
    """
    if m.r_max != r_max:
        m = dataclasses.replace(m, r_max=r_max)
    rng = np.random.default_rng(seed)
    L = m.boundary_length
    top = min(0.5 * L, 2.0)
    out = []
    rays = {}
    for _ in range(samples):
        th = float(rng.uniform(0.0, L))
        a1 = float(rng.uniform(0.05, top))
        a2 = float(rng.uniform(0.05, 0.75 * r_max))
        a5 = rays.setdefault(th, _normal_ray(m, th, _ray_budget(m)))
        out.append(quadrilateral(m, th, a1, a2, a5))
    ext = []
    for a1 in np.linspace(0.15, top, extremal):
        th = float(rng.uniform(0.0, L))
        a5 = _normal_ray(m, th, _ray_budget(m))
        h = escape_height(m, th, float(a1), a5=a5)
        if math.isfinite(h):
            ext.append(Quadrilateral(th, float(a1), h, True, math.sinh(a1) * math.sinh(h)))
    return QuadrilateralReport(out, ext, r_max)
