"""Distance to the boundary geodesic by fast marching on the periodic (r, t) grid."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba
import numpy as np

from ..surface.metric import FermiMetric


@dataclass(frozen=True)
class DistanceField:
    """Grid of distances to r = 0; rows are r_i = i hR, columns t_j = j hT (periodic)."""

    metric: FermiMetric
    d: np.ndarray
    cut: np.ndarray
    h_r: float
    h_t: float
    span_r: np.ndarray  # metric length of a radial grid step at each node (A hR)
    span_t: np.ndarray  # metric length of an angular grid step at each node (G hT)

    @property
    def shape(self):
        return self.d.shape

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.d.shape[0]) * self.h_r

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.d.shape[1]) * self.h_t

    def sample(self, r, t):
        """Bilinear interpolation of d at arbitrary (r, t)."""
        n_r, n_t = self.d.shape
        x = np.clip(np.asarray(r, dtype=float) / self.h_r, 0.0, n_r - 1.000001)
        y = np.mod(np.asarray(t, dtype=float), self.metric.boundary_length) / self.h_t
        i = np.floor(x).astype(int)
        j = np.floor(y).astype(int) % n_t
        fx = x - i
        fy = y - np.floor(y)
        j1 = (j + 1) % n_t
        d = self.d
        return ((1 - fx) * (1 - fy) * d[i, j] + fx * (1 - fy) * d[i + 1, j]
                + (1 - fx) * fy * d[i, j1] + fx * fy * d[i + 1, j1])


@numba.njit(cache=True)
def _solve_update(a, ha, b, hb):
    # ((T - a)/ha)^2 + ((T - b)/hb)^2 = 1 with the causal branch; one-sided fallback
    if a == np.inf and b == np.inf:
        return np.inf
    ta = a + ha
    tb = b + hb
    t1 = min(ta, tb)
    if a == np.inf or b == np.inf:
        return t1
    if abs(a - b) >= math.hypot(ha, hb) * 0.999999999999:
        return t1
    wa = 1.0 / (ha * ha)
    wb = 1.0 / (hb * hb)
    s = wa + wb
    m = (a * wa + b * wb) / s
    disc = (1.0 - wa * wb * (a - b) ** 2 / s) / s
    if disc < 0.0:
        return t1
    t = m + math.sqrt(disc)
    if t < max(a, b):
        return t1
    return min(t, t1)


@numba.njit(cache=True)
def _march(span_r, span_t):
    n_r, n_t = span_r.shape
    d = np.full((n_r, n_t), np.inf)
    state = np.zeros((n_r, n_t), dtype=np.int8)  # 0 far, 1 trial, 2 accepted
    heap = [(0.0, 0)]
    heap.pop()
    for j in range(n_t):
        d[0, j] = 0.0
        state[0, j] = 2
    for j in range(n_t):
        i = 1
        if n_r > 1:
            t = _update(d, state, span_r, span_t, i, j)
            d[i, j] = t
            state[i, j] = 1
            heapq.heappush(heap, (t, i * n_t + j))
    while len(heap) > 0:
        t, idx = heapq.heappop(heap)
        i = idx // n_t
        j = idx % n_t
        if state[i, j] == 2 or t > d[i, j]:
            continue
        state[i, j] = 2
        for k in range(4):
            if k == 0:
                ii, jj = i - 1, j
            elif k == 1:
                ii, jj = i + 1, j
            elif k == 2:
                ii, jj = i, (j - 1) % n_t
            else:
                ii, jj = i, (j + 1) % n_t
            if ii < 0 or ii >= n_r or state[ii, jj] == 2:
                continue
            tn = _update(d, state, span_r, span_t, ii, jj)
            if tn < d[ii, jj]:
                d[ii, jj] = tn
                state[ii, jj] = 1
                heapq.heappush(heap, (tn, ii * n_t + jj))
    return d


@numba.njit(cache=True)
def _update(d, state, span_r, span_t, i, j):
    n_r, n_t = d.shape
    a = np.inf
    if i > 0 and state[i - 1, j] == 2:
        a = d[i - 1, j]
    if i < n_r - 1 and state[i + 1, j] == 2:
        a = min(a, d[i + 1, j])
    b = np.inf
    jl = (j - 1) % n_t
    jr = (j + 1) % n_t
    if state[i, jl] == 2:
        b = d[i, jl]
    if state[i, jr] == 2:
        b = min(b, d[i, jr])
    return _solve_update(a, span_r[i, j], b, span_t[i, j])


def _cut_flags(d, span_r, span_t, threshold=0.3):
    """Cells where the distance has a ridge: it decreases on both sides along a grid axis."""
    up = np.zeros_like(d)
    down = np.zeros_like(d)
    up[1:-1] = (d[1:-1] - d[2:]) / span_r[1:-1]
    down[1:-1] = (d[1:-1] - d[:-2]) / span_r[1:-1]
    ridge_r = np.minimum(up, down) > threshold
    left = (d - np.roll(d, 1, axis=1)) / span_t
    right = (d - np.roll(d, -1, axis=1)) / span_t
    ridge_t = np.minimum(left, right) > threshold
    flags = ridge_r | ridge_t
    flags[0] = False
    return flags


def solve_eikonal(m: FermiMetric, n_r: int, n_theta: int) -> DistanceField:
    """First-order fast marching for |grad d|_g = 1 with d = 0 on r = 0."""
    if n_r < 64 or n_theta < 64:
        raise ValueError("resolution must be at least 64 x 64")
    h_r = m.r_max / (n_r - 1)
    h_t = m.boundary_length / n_theta
    R, T = np.meshgrid(np.arange(n_r) * h_r, np.arange(n_theta) * h_t, indexing="ij")
    j = m.jet(R, T)
    span_r = np.ascontiguousarray(j.A * h_r)
    span_t = np.ascontiguousarray(j.G * h_t)
    d = _march(span_r, span_t)
    return DistanceField(m, d, _cut_flags(d, span_r, span_t), h_r, h_t, span_r, span_t)
