"""Geodesic integration on FermiMetric surfaces, batched over many initial conditions.

Directions are angles psi in the orthonormal frame (e_r, e_t) = (d_r / A, d_t / G):
psi = 0 points away from the boundary, psi = pi/2 along increasing t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ..hypcore import HypDomainError
from .metric import FermiMetric

RTOL = 1e-11
ATOL = 1e-10


def _rhs_factory(m: FermiMetric, lengths: np.ndarray):
    # state (r, t, psi) with psi the frame angle; unit speed holds by construction
    n = lengths.size

    def rhs(_, y):
        r, t, psi = y.reshape(3, n)
        j = m.jet(r, t)
        c, s = np.cos(psi), np.sin(psi)
        # unit-time parametrization: derivatives scale with the length
        return np.concatenate([lengths * c / j.A, lengths * s / j.G,
                               lengths * (j.A_t * c - j.G_r * s) / (j.A * j.G)])

    return rhs


def initial_velocity(m: FermiMetric, r, t, psi):
    j = m.jet(r, t)
    return np.cos(psi) / j.A, np.sin(psi) / j.G


def direction_of(m: FermiMetric, r, t, vr, vt):
    """Frame angle psi of the velocity (vr, vt) at (r, t)."""
    j = m.jet(r, t)
    return np.arctan2(j.G * vt, j.A * vr)


class _Dense:
    """Dense solution reporting (r, t, r', t') rows for every trajectory."""

    def __init__(self, m: FermiMetric, sol, n: int):
        self._m, self._sol, self._n = m, sol, n

    def __call__(self, u):
        y = self._sol(u)
        r, t, psi = y[: self._n], y[self._n: 2 * self._n], y[2 * self._n:]
        vr, vt = initial_velocity(self._m, r, t, psi)
        return np.concatenate([r, t, vr, vt])


class _Solution:
    def __init__(self, m: FermiMetric, sol, n: int):
        self.sol = _Dense(m, sol.sol, n) if sol.sol is not None else None


def shoot_batch(m: FermiMetric, r0, t0, psi, length, dense: bool = False):
    """Integrate unit-speed geodesics; returns end states (r, t, r', t') and optionally the solver.

    All arrays broadcast to a common 1-D shape.  With ``dense`` the
    solution object is returned for evaluation at fractional arc length
    s / length in [0, 1].
    """
    r0, t0, psi, length = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (r0, t0, psi, length))
    r0, t0, psi, length = np.broadcast_arrays(r0, t0, psi, length)
    r0, t0, psi, length = (np.ascontiguousarray(x) for x in (r0, t0, psi, length))
    n = r0.size
    y0 = np.concatenate([r0, t0, psi])
    sol = solve_ivp(_rhs_factory(m, length), (0.0, 1.0), y0, method="DOP853", rtol=RTOL,
                    atol=ATOL / max(1.0, float(length.max(initial=1.0))), dense_output=dense,
                    first_step=0.01)
    if not sol.success:
        raise RuntimeError(f"geodesic integration failed: {sol.message}")
    r, t, ps = sol.y[:, -1].reshape(3, -1)
    vr, vt = initial_velocity(m, r, t, ps)
    end = np.stack([r, t, vr, vt])
    return (end, _Solution(m, sol, n)) if dense else end


@dataclass(frozen=True)
class GeodesicPath:
    """Samples (r, t, r', t') at uniform arc-length steps; t is not wrapped."""

    s: np.ndarray
    r: np.ndarray
    t: np.ndarray
    vr: np.ndarray
    vt: np.ndarray
    length: float
    truncated: bool = False

    def speed_error(self, m: FermiMetric) -> float:
        j = m.jet(self.r, self.t)
        return float(np.abs((j.A * self.vr) ** 2 + (j.G * self.vt) ** 2 - 1.0).max())

    def clairaut(self, m: FermiMetric) -> np.ndarray:
        return m.G(self.r, self.t) ** 2 * self.vt


def geodesic_shoot(m: FermiMetric, start, direction: float, length: float, samples: int = 201) -> GeodesicPath:
    """Single geodesic from ``start = (r, t)`` with frame angle ``direction``.

    Paths are cut at the first exit through r = 0 or r = rMax and flagged as truncated.
    """
    r0, t0 = start
    if not (0.0 <= r0 <= m.r_max):
        raise HypDomainError(f"start radius {r0} outside [0, {m.r_max}]")
    if length <= 0.0:
        raise HypDomainError("length must be positive")
    _, sol = shoot_batch(m, r0, t0, direction, length, dense=True)
    u = np.linspace(0.0, 1.0, samples)
    y = sol.sol(u)
    r = y[0]
    eps = 1e-12
    leaving = np.nonzero((r < -eps) | (r > m.r_max + eps))[0]
    truncated = False
    if leaving.size and leaving[0] > 0:
        k = leaving[0]
        wall = 0.0 if r[k] < 0 else m.r_max
        uk = brentq(lambda x: sol.sol(x)[0] - wall, u[k - 1], u[k], xtol=1e-14)
        u = np.append(u[:k], uk)
        y = sol.sol(u)
        truncated = True
    return GeodesicPath(u * length, y[0], y[1], y[2], y[3], float(u[-1] * length), truncated)


# --- shortest connection to the boundary -------------------------------------


def _radial_length(m: FermiMetric, r, t, n: int = 257):
    # length of the coordinate ray t = const down to the boundary: an upper bound for the distance
    s = np.linspace(0.0, 1.0, n)
    rr = np.multiply.outer(np.atleast_1d(r), s)
    A = m.jet(rr, np.broadcast_to(np.atleast_1d(t)[:, None], rr.shape)).A
    return np.trapezoid(A, rr, axis=1)


def _hermite_root(y0, y1, d0, d1):
    """Root in [0, 1] of the cubic Hermite interpolant with values y and slopes d (per unit step)."""
    lo = np.zeros_like(y0)
    hi = np.ones_like(y0)
    x = np.where(y0 != y1, y0 / (y0 - y1), 0.5)
    for _ in range(60):
        x = np.clip(x, lo, hi)
        x2 = x * x
        x3 = x2 * x
        f = (2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * y1 + (x3 - x2) * d1
        fp = (6 * x2 - 6 * x) * y0 + (3 * x2 - 4 * x + 1) * d0 + (-6 * x2 + 6 * x) * y1 + (3 * x2 - 2 * x) * d1
        # y0 > 0 >= y1 on the bracket, so f > 0 means the root lies to the right
        lo = np.where(f > 0, x, lo)
        hi = np.where(f > 0, hi, x)
        step = np.where(fp != 0, f / np.where(fp != 0, fp, 1.0), 0.0)
        nx = x - step
        bad = (nx <= lo) | (nx >= hi) | (fp == 0)
        nx = np.where(bad, 0.5 * (lo + hi), nx)
        if np.all(np.abs(nx - x) < 1e-15):
            x = nx
            break
        x = nx
    return x


def _boundary_hits(m: FermiMetric, r, t, psi, budget, nodes: int = 513):
    """Arc length to r = 0 along each direction and the tangential part of the arriving velocity.

    Missed trajectories get length inf and tangential part nan.
    """
    n = psi.size
    _, sol = shoot_batch(m, r, t, psi, budget, dense=True)
    grid = np.linspace(0.0, 1.0, nodes)
    ys = sol.sol(grid).reshape(4, n, nodes)
    rs, ts, vrs, vts = ys
    length = np.full(n, math.inf)
    tangential = np.full(n, math.nan)
    below = rs <= 0.0
    has = below.any(axis=1)
    k = np.argmax(below, axis=1)
    at_start = has & (k == 0)
    length[at_start] = 0.0
    idx = np.nonzero(has & (k > 0))[0]
    if idx.size:
        k1 = k[idx]
        k0 = k1 - 1
        du = grid[1] - grid[0]
        scale = budget[idx] * du
        x = _hermite_root(rs[idx, k0], rs[idx, k1], vrs[idx, k0] * scale, vrs[idx, k1] * scale)
        u = grid[k0] + x * du
        length[idx] = u * budget[idx]
        # tangential velocity from linear blending of the bracketing nodes, then renormalized
        w = x
        rh = np.zeros(idx.size)
        th = (1 - w) * ts[idx, k0] + w * ts[idx, k1]
        vr = (1 - w) * vrs[idx, k0] + w * vrs[idx, k1]
        vt = (1 - w) * vts[idx, k0] + w * vts[idx, k1]
        j = m.jet(rh, th)
        tangential[idx] = j.G * vt / np.hypot(j.A * vr, j.G * vt)
    return length, tangential


def _hit_lengths(m: FermiMetric, r, t, psi, budget):
    """Arc length to the boundary along each direction psi from (r, t) (inf if not reached)."""
    return _boundary_hits(m, r, t, psi, budget)[0]


@dataclass(frozen=True)
class Connection:
    path: GeodesicPath
    dist: float
    direction: float  # frame angle at the start point
    foot_angle: float  # deviation of the arriving velocity from the boundary normal
    candidates: int


def descent_direction(m: FermiMetric, field, r, t, step: float = 0.5):
    """Frame angle of the steepest descent of a sampled distance field at (r, t)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    hr, ht = step * field.h_r, step * field.h_t
    lo = np.maximum(r - hr, 0.0)
    hi = np.minimum(r + hr, m.r_max)
    dr = (field.sample(hi, t) - field.sample(lo, t)) / np.maximum(hi - lo, 1e-300)
    dt = (field.sample(r, t + ht) - field.sample(r, t - ht)) / (2 * ht)
    j = m.jet(r, t)
    return np.arctan2(-dt / j.G, -dr / j.A)


def descent_trace(m: FermiMetric, field, r, t, step: float = 0.5, max_steps: int = 20000):
    """Follow the steepest descent of a sampled distance field down to r = 0.

    Returns the foot angle (unwrapped) and the traced metric length per point.
    ``step`` is the step length in units of the radial grid spacing.
    """
    r = np.array(np.atleast_1d(r), dtype=float)
    t = np.array(np.atleast_1d(t), dtype=float)
    length = np.zeros_like(r)
    h = step * field.h_r
    live = r > 0.0
    for _ in range(max_steps):
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        psi = descent_direction(m, field, r[idx], t[idx])
        j = m.jet(r[idx], t[idx])
        dr = np.cos(psi) / j.A
        dt = np.sin(psi) / j.G
        # midpoint rule in the frame of the current point
        j2 = m.jet(np.maximum(r[idx] + 0.5 * h * dr, 0.0), t[idx] + 0.5 * h * dt)
        psi2 = descent_direction(m, field, np.maximum(r[idx] + 0.5 * h * dr, 0.0), t[idx] + 0.5 * h * dt)
        dr2 = np.cos(psi2) / j2.A
        dt2 = np.sin(psi2) / j2.G
        hh = np.where(r[idx] + h * dr2 < 0.0, r[idx] / np.maximum(-dr2, 1e-300), h)
        r[idx] = np.maximum(r[idx] + hh * dr2, 0.0)
        t[idx] += hh * dt2
        length[idx] += hh
        live[idx] = r[idx] > 0.0
    return t, length


def normal_connections(m: FermiMetric, points, feet, lengths, iters: int = 30, tol: float = 1e-8):
    """Newton solve for boundary-normal geodesics through each point.

    Unknowns are the foot angle and the length of the geodesic leaving the
    boundary orthogonally; returns (feet, lengths, converged).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    foot = np.array(feet, dtype=float)
    ell = np.array(lengths, dtype=float)
    cap = 2.0 * ell + 1.0
    n = foot.size
    period = m.boundary_length
    done = np.zeros(n, dtype=bool)
    failed = np.zeros(n, dtype=bool)
    eps = 1e-6
    for _ in range(iters):
        act = np.nonzero(~done & ~failed)[0]
        if act.size == 0:
            break
        k = act.size
        ts = np.concatenate([foot[act], foot[act] + eps])
        ls = np.concatenate([ell[act], ell[act]])
        end = shoot_batch(m, 0.0, ts, 0.0, ls)
        er = end[0, :k] - pts[act, 0]
        et = end[1, :k] - pts[act, 1]
        et -= period * np.round(et / period)
        df_r = (end[0, k:] - end[0, :k]) / eps
        df_t = (end[1, k:] - end[1, :k]) / eps
        dl_r, dl_t = end[2, :k], end[3, :k]
        det = df_r * dl_t - df_t * dl_r
        bad = ~np.isfinite(det) | (np.abs(det) < 1e-14)
        det = np.where(bad, 1.0, det)
        step_f = (er * dl_t - et * dl_r) / det
        step_l = (df_r * et - df_t * er) / det
        scale = np.minimum(1.0, 0.25 * np.maximum(ell[act], 0.1) / np.maximum(np.hypot(step_f, step_l), 1e-300))
        foot[act] -= scale * step_f
        ell[act] = np.clip(ell[act] - scale * step_l, 1e-9, cap[act])
        j = m.jet(pts[act, 0], pts[act, 1])
        err = np.hypot(j.A * er, j.G * et)
        done[act] = err < tol
        failed[act] = bad
    return foot, ell, done


def minimal_connections(m: FermiMetric, points, field=None, fan: int = 64, local: int = 65,
                        iters: int = 40, tol: float = 1e-13) -> list[Connection]:
    """Shortest geodesics from each point to the boundary.

    A periodic fan of directions is shot first; with a distance ``field``
    a dense local fan around its descent direction is added.  Every sign
    change of the tangential arrival velocity between neighbouring
    directions brackets a critical point of the hit length; these are
    refined by the Illinois method and the shortest one is kept.  At the
    optimum the geodesic meets the boundary orthogonally.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    npts = pts.shape[0]
    r, t = pts[:, 0], pts[:, 1]
    budget = 1.5 * _radial_length(m, r, t) + 1e-9
    dirs = np.broadcast_to(np.linspace(0.0, 2 * math.pi, fan, endpoint=False), (npts, fan))
    if field is not None:
        g = descent_direction(m, field, r, t)
        dirs = np.concatenate([dirs, g[:, None] + np.linspace(-0.5, 0.5, local)[None, :]], axis=1)
    dirs = np.sort(np.mod(dirs, 2 * math.pi), axis=1)
    nd = dirs.shape[1]
    hl, tg = _boundary_hits(m, np.repeat(r, nd), np.repeat(t, nd), dirs.reshape(-1), np.repeat(budget, nd))
    hl = hl.reshape(npts, nd)
    tg = tg.reshape(npts, nd)
    owner, lo, hi, glo, ghi = [], [], [], [], []
    for p in range(npts):
        if hl[p].min() == 0.0:
            continue
        for i in range(nd):
            i1 = (i + 1) % nd
            a, b = tg[p, i], tg[p, i1]
            if math.isfinite(a) and math.isfinite(b) and a * b <= 0.0:
                owner.append(p)
                lo.append(dirs[p, i])
                hi.append(dirs[p, i1] + (2 * math.pi if i1 == 0 else 0.0))
                glo.append(a)
                ghi.append(b)
    owner = np.array(owner, dtype=int)
    lo, hi, glo, ghi = (np.array(v, dtype=float) for v in (lo, hi, glo, ghi))
    best_x = lo.copy()
    best_f = np.full(lo.size, math.inf)
    if lo.size:
        side = np.zeros(lo.size, dtype=int)
        active = np.ones(lo.size, dtype=bool)
        for _ in range(iters):
            act = np.nonzero(active)[0]
            if act.size == 0:
                break
            x = np.where(glo[act] != ghi[act],
                         (lo[act] * ghi[act] - hi[act] * glo[act]) / np.where(glo[act] != ghi[act], ghi[act] - glo[act], 1.0),
                         0.5 * (lo[act] + hi[act]))
            f, g = _boundary_hits(m, r[owner[act]], t[owner[act]], x, budget[owner[act]])
            best_x[act] = x
            best_f[act] = f
            bad = ~np.isfinite(g)
            g = np.where(bad, 0.0, g)
            left = g * glo[act] > 0.0  # root is in [x, hi]
            # Illinois: halve the retained end value when the same side is kept twice
            ghi[act] = np.where(left & (side[act] == 1), 0.5 * ghi[act], ghi[act])
            glo[act] = np.where(~left & (side[act] == -1), 0.5 * glo[act], glo[act])
            lo[act] = np.where(left, x, lo[act])
            glo[act] = np.where(left, g, glo[act])
            hi[act] = np.where(left, hi[act], x)
            ghi[act] = np.where(left, ghi[act], g)
            side[act] = np.where(left, 1, -1)
            active[act] = ~((np.abs(g) < tol) | (hi[act] - lo[act] < tol) | bad)
    fan_psi = np.full(npts, math.nan)
    fan_dist = np.full(npts, math.inf)
    fan_cands = np.zeros(npts, dtype=int)
    for p in range(npts):
        sel = np.nonzero(owner == p)[0]
        if sel.size and np.isfinite(best_f[sel]).any():
            k = sel[np.nanargmin(best_f[sel])]
            fan_psi[p], fan_dist[p], fan_cands[p] = best_x[k], best_f[k], sel.size
        elif np.isfinite(hl[p]).any():
            i = int(np.argmin(hl[p]))
            fan_psi[p], fan_dist[p] = dirs[p, i], hl[p, i]
    if field is not None:
        inner = np.nonzero(r > 0.0)[0]
        feet, traced = descent_trace(m, field, r[inner], t[inner])
        feet, ell, ok = normal_connections(m, pts[inner], feet, traced)
        end = shoot_batch(m, 0.0, feet, 0.0, ell)
        back = direction_of(m, end[0], end[1], -end[2], -end[3])
        better = ok & (ell < fan_dist[inner])
        fan_psi[inner[better]] = back[better]
        fan_dist[inner[better]] = ell[better]
        fan_cands[inner[better]] += 1
    out = []
    for p in range(npts):
        if hl[p].min() == 0.0:
            path = GeodesicPath(np.zeros(1), np.zeros(1), np.array([t[p]]), np.array([-1.0]), np.zeros(1), 0.0)
            out.append(Connection(path, 0.0, math.pi, 0.0, 0))
            continue
        if not math.isfinite(fan_dist[p]):
            raise RuntimeError(f"no geodesic from {pts[p]} reached the boundary within {budget[p]:.4g}")
        psi, dist = float(fan_psi[p]), float(fan_dist[p])
        path = geodesic_shoot(m, (r[p], t[p]), psi, dist * (1 + 1e-9) + 1e-12)
        j = m.jet(path.r[-1], path.t[-1])
        foot = abs(math.atan2(float(j.G * path.vt[-1]), -float(j.A * path.vr[-1])))
        out.append(Connection(path, dist, psi, foot, int(fan_cands[p])))
    return out


def minimal_connection(m: FermiMetric, p, field=None) -> Connection:
    return minimal_connections(m, [p], field)[0]


# --- two-point shooting and sampled triangles ------------------------------------


def _initial_guess(m: FermiMetric, p, q):
    rm, tm = 0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])
    j = m.jet(rm, tm)
    dx = float(j.A) * (q[0] - p[0])
    dy = float(j.G) * (q[1] - p[1])
    return math.atan2(dy, dx), math.hypot(dx, dy)


def connect_batch(m: FermiMetric, starts, ends, iters: int = 30, tol: float = 1e-11):
    """Newton two-point shooting; returns (psi, length, converged) per pair.

    The Jacobian in the direction uses a finite-difference companion
    trajectory; the length derivative is the end velocity.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    n = starts.shape[0]
    psi = np.empty(n)
    ell = np.empty(n)
    for i in range(n):
        psi[i], ell[i] = _initial_guess(m, starts[i], ends[i])
    done = np.zeros(n, dtype=bool)
    eps = 1e-6
    for _ in range(iters):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        rs = np.concatenate([starts[act, 0], starts[act, 0]])
        ts = np.concatenate([starts[act, 1], starts[act, 1]])
        ps = np.concatenate([psi[act], psi[act] + eps])
        ls = np.concatenate([ell[act], ell[act]])
        end = shoot_batch(m, rs, ts, ps, ls)
        k = act.size
        er = end[0, :k] - ends[act, 0]
        et = end[1, :k] - ends[act, 1]
        dpsi_r = (end[0, k:] - end[0, :k]) / eps
        dpsi_t = (end[1, k:] - end[1, :k]) / eps
        dl_r, dl_t = end[2, :k], end[3, :k]
        det = dpsi_r * dl_t - dpsi_t * dl_r
        step_psi = (er * dl_t - et * dl_r) / det
        step_l = (dpsi_r * et - dpsi_t * er) / det
        # damp large steps to stay in the basin of the near-straight solution
        scale = np.minimum(1.0, 0.3 / np.maximum(np.abs(step_psi), 1e-300))
        psi[act] -= scale * step_psi
        ell[act] -= scale * step_l
        j = m.jet(ends[act, 0], ends[act, 1])
        err = np.hypot(j.A * er, j.G * et)
        done[act] = err < tol
    return psi, ell, done


@dataclass(frozen=True)
class MeasuredTriangle:
    vertices: np.ndarray  # (3, 2) in (r, t)
    sides: np.ndarray  # side i is opposite vertex i
    angles: np.ndarray  # angle at vertex i
    ok: bool


def _frame_angle_diff(a, b):
    d = abs((a - b + math.pi) % (2 * math.pi) - math.pi)
    return d


def sample_triangles(m: FermiMetric, vertices) -> list[MeasuredTriangle]:
    """Connect each triple of vertices pairwise and measure sides and corner angles."""
    verts = np.asarray(vertices, dtype=float).reshape(-1, 3, 2)
    nt = verts.shape[0]
    # side i joins vertices (i+1, i+2), shot from the first of the pair
    pairs = [(1, 2), (2, 0), (0, 1)]
    starts = np.concatenate([verts[:, a] for a, _ in pairs])
    ends = np.concatenate([verts[:, b] for _, b in pairs])
    psi, ell, ok = connect_batch(m, starts, ends)
    end = shoot_batch(m, starts[:, 0], starts[:, 1], psi, ell)
    back = direction_of(m, end[0], end[1], -end[2], -end[3])
    out = []
    for k in range(nt):
        ids = [i * nt + k for i in range(3)]
        sides = ell[ids]
        # outgoing frame angles at each vertex toward the other two
        out_dir = {}
        for side, (a, b) in enumerate(pairs):
            idx = side * nt + k
            out_dir[(a, b)] = psi[idx]
            out_dir[(b, a)] = back[idx]
        angles = np.array([
            _frame_angle_diff(out_dir[(0, 1)], out_dir[(0, 2)]),
            _frame_angle_diff(out_dir[(1, 2)], out_dir[(1, 0)]),
            _frame_angle_diff(out_dir[(2, 0)], out_dir[(2, 1)]),
        ])
        out.append(MeasuredTriangle(verts[k], sides, angles, bool(ok[ids].all())))
    return out


def sample_triangle(m: FermiMetric, seeds) -> MeasuredTriangle:
    return sample_triangles(m, [seeds])[0]
