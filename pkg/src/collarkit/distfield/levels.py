"""Level curves of a distance field on the periodic grid and their components.

Conventions: the closed superlevel set S = {d >= level} is 8-connected,
the open sublevel set Z = {d < level} is 4-connected.  A virtual row above
r = rMax belongs to S, so the component of S reaching it is the infinite
one and every level curve closes up.  Saddle cells are split so that the
two S corners stay joined, which keeps the two conventions dual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .eikonal import DistanceField

OMEGA = "omega-d-0"
COMPACT = "compact-component-boundary"

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


def periodic_label(mask: np.ndarray, eight: bool) -> tuple[np.ndarray, int]:
    """Connected components of ``mask`` with the second axis periodic; labels are 1..n, 0 outside."""
    lab, n = ndimage.label(mask, structure=_EIGHT if eight else _FOUR)
    if n == 0:
        return lab, 0
    left = lab[:, 0]
    right = lab[:, -1]
    pairs = [(left, right)]
    if eight:
        pairs.append((left[1:], right[:-1]))
        pairs.append((left[:-1], right[1:]))
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    keep = (a > 0) & (b > 0)
    g = coo_matrix((np.ones(keep.sum()), (a[keep], b[keep])), shape=(n + 1, n + 1))
    m, comp = connected_components(g, directed=False)
    # relabel so that labels stay 1..m' in order of first appearance
    comp = comp[1:]
    uniq, inv = np.unique(comp, return_inverse=True)
    mapping = np.concatenate([[0], inv + 1])
    return mapping[lab], uniq.size


def superlevel_components(d: np.ndarray, level: float):
    """Labels of S = {d >= level} with the virtual infinite row; returns (labels, count, infinite label)."""
    padded = np.vstack([d >= level, np.ones((1, d.shape[1]), dtype=bool)])
    lab, n = periodic_label(padded, eight=True)
    return lab[:-1], n, int(lab[-1, 0])


@dataclass(frozen=True)
class LevelCurve:
    level: float
    r: np.ndarray
    theta: np.ndarray  # unwrapped along the curve; wrap with mod boundary_length
    closed: bool
    simple: bool
    length: float
    winding: int  # net turns around the cylinder in the +theta direction
    component_class: str
    touches_top: bool
    label: int  # label of the {d >= level} component on the right, as in superlevel_components

    @property
    def segment_lengths(self) -> np.ndarray:
        return self._seg

    def wrapped_theta(self, period: float) -> np.ndarray:
        return np.mod(self.theta, period)


def _metric_lengths(m, r, t):
    mr = 0.5 * (r[1:] + r[:-1])
    mt = 0.5 * (t[1:] + t[:-1])
    j = m.jet(mr, mt)
    return np.hypot(j.A * np.diff(r), j.G * np.diff(t))


def _segments(d: np.ndarray, level: float):
    """Oriented contour segments of all cells; Z = {d < level} lies on the left in the (r, theta) chart."""
    n_r, n_t = d.shape
    D = np.vstack([d, np.full((1, n_t), np.inf)])
    # cells i = 0..n_r-1 (the last one uses the virtual row); only rows straddling the level can be crossed
    lo = np.minimum(D[:-1].min(axis=1), D[1:].min(axis=1))
    hi = np.maximum(D[:-1].max(axis=1), D[1:].max(axis=1))
    rows = np.nonzero((lo < level) & (hi >= level))[0]
    I, J = np.meshgrid(rows, np.arange(n_t), indexing="ij")
    J1 = (J + 1) % n_t
    # corners in cyclic order a(i,j) b(i,j+1) c(i+1,j+1) e(i+1,j)
    ci = np.stack([I, I, I + 1, I + 1])
    cj = np.stack([J, J1, J1, J])
    vals = D[ci, cj]
    ins = vals >= level
    code = (ins[0] * 1 + ins[1] * 2 + ins[2] * 4 + ins[3] * 8).ravel()
    ci = ci.reshape(4, -1)
    cj = cj.reshape(4, -1)
    vals = vals.reshape(4, -1)
    ins = ins.reshape(4, -1)
    # edge k joins corner k and k+1: ids for bottom (r const), right (t const), top, left
    Ii, Jj = I.ravel(), J.ravel()
    h_id = lambda i, j: i * n_t + j
    v_id = lambda i, j: (n_r + 1) * n_t + i * n_t + j
    edge_ids = np.stack([h_id(Ii, Jj), v_id(Ii, (Jj + 1) % n_t), h_id(Ii + 1, Jj), v_id(Ii, Jj)])
    crossed = ins != np.roll(ins, -1, axis=0)
    saddle = (code == 5) | (code == 10)
    starts, ends, cells, s_corner = [], [], [], []
    two = np.nonzero(crossed.sum(axis=0) == 2)[0]
    if two.size:
        ek = np.argsort(~crossed[:, two], axis=0, kind="stable")[:2]  # indices of the two crossed edges
        e1, e2 = ek[0], ek[1]
        # orientation: walking e1 -> e2, the corner following e1 (corner e1+1) is on one side
        c_after = (e1 + 1) % 4
        in_after = ins[c_after, two]
        # the corner order is clockwise in the (r, t) chart, so corners passed between e1 and e2
        # lie on the left of e1 -> e2; that side must be Z, otherwise reverse
        flip = in_after
        s = np.where(flip, e2, e1)
        e = np.where(flip, e1, e2)
        starts.append(edge_ids[s, two])
        ends.append(edge_ids[e, two])
        cells.append(two)
        s_node = np.where(in_after, c_after, (e2 + 1) % 4)
        s_corner.append(s_node)
    sad = np.nonzero(saddle)[0]
    if sad.size:
        for k in range(4):
            z = ~ins[k, sad]
            idx = sad[z]
            # Z corner k is cut off by a segment from edge k-1 to edge k, which keeps it on the left
            starts.append(edge_ids[(k - 1) % 4, idx])
            ends.append(edge_ids[k, idx])
            cells.append(idx)
            s_corner.append(np.full(idx.size, (k + 1) % 4))
    if not starts:
        return None
    start = np.concatenate(starts)
    end = np.concatenate(ends)
    cell = np.concatenate(cells)  # indices into the selected cells
    scorner = np.concatenate(s_corner)
    return start, end, cell, scorner, ci, cj, vals


def _edge_point(eid, d, level, h_r, h_t):
    n_r, n_t = d.shape
    D = np.vstack([d, np.full((1, n_t), np.inf)])
    nh = (n_r + 1) * n_t
    r = np.empty(eid.size)
    t = np.empty(eid.size)
    hmask = eid < nh
    i = eid[hmask] // n_t
    j = eid[hmask] % n_t
    va, vb = D[i, j], D[i, (j + 1) % n_t]
    f = (level - va) / (vb - va)
    r[hmask] = i * h_r
    t[hmask] = (j + f) * h_t
    vm = ~hmask
    k = eid[vm] - nh
    i = k // n_t
    j = k % n_t
    va, vb = D[i, j], D[i + 1, j]
    with np.errstate(invalid="ignore"):
        f = np.where(np.isinf(vb), 0.0, (level - va) / np.where(np.isinf(vb), 1.0, vb - va))
    r[vm] = (i + f) * h_r
    t[vm] = j * h_t
    return r, t


def level_curves(f: DistanceField, level: float) -> list[LevelCurve]:
    """Closed level curves of f at ``level``, each with Z(level) on its left."""
    d = f.d
    if not level > 0.0 or level > d.max():
        return []
    segs = _segments(d, level)
    if segs is None:
        return []
    start, end, cell, scorner, ci, cj, _ = segs
    n_r, n_t = d.shape
    L = f.metric.boundary_length
    lab, _, inf_label = superlevel_components(d, level)
    lab_pad = np.vstack([lab, np.full((1, n_t), inf_label)])
    nxt = {int(s): k for k, s in enumerate(start)}
    used = np.zeros(start.size, dtype=bool)
    out = []
    for k0 in range(start.size):
        if used[k0]:
            continue
        chain = []
        k = k0
        closed = False
        while True:
            used[k] = True
            chain.append(k)
            k = nxt.get(int(end[k]), -1)
            if k == k0:
                closed = True
                break
            if k < 0 or used[k]:
                break
        ids = start[chain]
        r, t = _edge_point(ids, d, level, f.h_r, f.h_t)
        if closed:
            r = np.append(r, r[0])
            t = np.append(t, t[0])
        # unwrap theta along the curve
        dt = np.diff(t)
        dt = dt - L * np.round(dt / L)
        t = t[0] + np.concatenate([[0.0], np.cumsum(dt)])
        seg = _metric_lengths(f.metric, r, t)
        winding = int(round((t[-1] - t[0]) / L)) if closed else 0
        c0 = chain[0]
        node = scorner[c0]
        side = lab_pad[ci[node, cell[c0]], cj[node, cell[c0]]]
        cls = OMEGA if side == inf_label else COMPACT
        touches = bool(np.any(r >= (n_r - 1) * f.h_r - 1e-12))
        curve = LevelCurve(level, r, t, closed, bool(np.unique(ids).size == ids.size), float(seg.sum()),
                           winding, cls, touches, int(side))
        object.__setattr__(curve, "_seg", seg)
        out.append(curve)
    return out


def omega_curve(curves: list[LevelCurve]) -> LevelCurve | None:
    """The curve of the infinite-component boundary that winds once around the cylinder.

    On a distance field {d < level} is connected and this is the only curve
    of that class; the remaining ones bound holes of {d < level}.
    """
    om = [c for c in curves if c.component_class == OMEGA]
    if not om:
        return None
    winding = [c for c in om if c.winding == 1]
    return max(winding or om, key=lambda c: c.length)


def infinite_component(f: DistanceField, level: float):
    """Mask of the infinite component of {d >= level} and its boundary curve."""
    lab, n, inf_label = superlevel_components(f.d, level)
    mask = lab == inf_label
    if not mask[-1].any():
        raise RuntimeError(f"no component of d >= {level:g} reaches r = rMax; raise rMax or the resolution")
    om = omega_curve(level_curves(f, level))
    return mask, om


def count_components(f: DistanceField, level: float) -> tuple[int, int]:
    """Components of {d >= level} (8-connected, infinite row included) and of {d < level} (4-connected)."""
    _, n_s, _ = superlevel_components(f.d, level)
    _, n_z = periodic_label(f.d < level, eight=False)
    return n_s, n_z


def polyline_self_intersections(r: np.ndarray, t: np.ndarray) -> int:
    """Count proper crossings between non-adjacent segments of a closed polyline (brute force)."""
    p = np.column_stack([r, t])
    a, b = p[:-1], p[1:]
    n = a.shape[0]
    count = 0
    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        c, e = a[j], b[j]
        d1 = _orient(a[i], b[i], c)
        d2 = _orient(a[i], b[i], e)
        d3 = _orient_many(c, e, a[i])
        d4 = _orient_many(c, e, b[i])
        count += int(np.sum((d1 * d2 < 0) & (d3 * d4 < 0)))
    return count


def _orient(p, q, s):
    return (q[0] - p[0]) * (s[:, 1] - p[1]) - (q[1] - p[1]) * (s[:, 0] - p[0])


def _orient_many(p, q, s):
    return (q[:, 0] - p[:, 0]) * (s[1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (s[0] - p[:, 0])
