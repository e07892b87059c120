"""Trunk and cactus arms, the measured collar width, thinness and the thin-cylinder sweep.

"Infinity" is the row r = rMax: a cell is in the trunk when it can reach
that row along an 8-connected path on which d never drops below d(cell).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numba
import numpy as np

from ..collar import cactus_loop_bound
from ..surface.metric import FermiMetric, curvature_lower_bound
from .eikonal import DistanceField, solve_eikonal
from .levels import COMPACT, LevelCurve, level_curves, omega_curve, periodic_label, superlevel_components


@numba.njit(cache=True)
def _bottleneck(d):
    n_r, n_t = d.shape
    b = np.full((n_r, n_t), -np.inf)
    done = np.zeros((n_r, n_t), dtype=np.bool_)
    heap = [(0.0, 0)]
    heap.pop()
    for j in range(n_t):
        b[n_r - 1, j] = d[n_r - 1, j]
        heapq.heappush(heap, (-b[n_r - 1, j], (n_r - 1) * n_t + j))
    while len(heap) > 0:
        nb, idx = heapq.heappop(heap)
        i = idx // n_t
        j = idx % n_t
        if done[i, j]:
            continue
        done[i, j] = True
        v = -nb
        for di in range(-1, 2):
            ii = i + di
            if ii < 0 or ii >= n_r:
                continue
            for dj in range(-1, 2):
                if di == 0 and dj == 0:
                    continue
                jj = (j + dj) % n_t
                if done[ii, jj]:
                    continue
                c = min(v, d[ii, jj])
                if c > b[ii, jj]:
                    b[ii, jj] = c
                    heapq.heappush(heap, (-c, ii * n_t + jj))
    return b


def bottleneck(f: DistanceField) -> np.ndarray:
    """Largest value m such that a cell reaches r = rMax along an 8-connected path with d >= m."""
    return _bottleneck(np.ascontiguousarray(f.d))


@dataclass(frozen=True)
class Arm:
    index: int
    d_a: float  # distance level at which the arm detaches from the trunk
    peak: float  # largest distance inside the arm
    peak_cell: tuple[int, int]
    cells: int
    area: float
    boundary: LevelCurve | None


@dataclass(frozen=True)
class ArmDecomposition:
    labels: np.ndarray  # 0 trunk, i >= 1 arm i
    arms: list[Arm]
    trunk_connected: bool
    sweep_levels: int
    sweep_mismatch: int  # cells where the level sweep and the bottleneck disagree
    absorbed: int  # shallow noise arms (depth < 2 hR) merged into the trunk

    @property
    def trunk(self) -> np.ndarray:
        return self.labels == 0


def _cell_area(f: DistanceField) -> np.ndarray:
    return f.span_r * f.span_t


def classify_types(f: DistanceField, levels: int = 256, min_depth: float | None = None) -> ArmDecomposition:
    """Type 0 (trunk) versus type 1 (arm) cells from the closure of the infinite-component boundaries."""
    if levels < 256:
        raise ValueError("need at least 256 sweep levels")
    d = f.d
    min_depth = 2.0 * f.h_r if min_depth is None else min_depth
    b = bottleneck(f)
    exact = b >= d  # reaches infinity without going below its own level
    # level sweep: membership of each cell in the infinite component at the last level below it
    top = float(d.max())
    grid = top * np.arange(1, levels + 1) / levels
    k_of = np.searchsorted(grid, d, side="right") - 1  # -1 below the first level
    sweep = k_of < 0
    for k in np.unique(k_of[k_of >= 0]):
        lab, _, inf_label = superlevel_components(d, grid[k])
        sel = k_of == k
        sweep[sel] = lab[sel] == inf_label
    # a cell exact-type-1 but swept into the trunk sits within one level step of its saddle
    mismatch = int(np.count_nonzero(sweep != exact))
    raw, n = periodic_label(~exact, eight=True)
    labels = np.zeros(d.shape, dtype=int)
    arms = []
    absorbed = 0
    area = _cell_area(f)
    for lab in range(1, n + 1):
        cells = raw == lab
        vals = np.where(cells, d, -np.inf)
        pk = np.unravel_index(int(np.argmax(vals)), d.shape)
        peak = float(d[pk])
        d_a = float(b[pk])
        if peak - d_a < min_depth:
            absorbed += 1
            continue
        idx = len(arms) + 1
        labels[cells] = idx
        arms.append(Arm(idx, d_a, peak, (int(pk[0]), int(pk[1])), int(cells.sum()), float(area[cells].sum()),
                        _arm_boundary(f, d_a, pk)))
    _, n_trunk = periodic_label(labels == 0, eight=True)
    return ArmDecomposition(labels, arms, n_trunk == 1, levels, mismatch, absorbed)


def _arm_boundary(f: DistanceField, d_a: float, peak_cell) -> LevelCurve | None:
    # just above d_A the arm is a compact component of {d >= level}; pick the curve around the peak
    level = d_a + 0.25 * f.h_r
    lab, _, _ = superlevel_components(f.d, level)
    target = lab[peak_cell]
    for c in level_curves(f, level):
        if c.component_class == COMPACT and c.label == target:
            return c
    return None


@dataclass(frozen=True)
class CollarWidth:
    width: float
    unbounded: bool  # no compact component up to rMax, so the width is the truncation
    step: float
    first_split: float | None


def measured_collar_width(f: DistanceField, min_depth: float | None = None) -> CollarWidth:
    """Largest scan level d* with {d >= level} connected for every scan level up to d*.

    Scan step hR/2.  A compact component counts once its depth (max d inside
    minus the level) reaches ``min_depth`` (2 hR by default), which filters
    one-cell ripples of the discrete field.  A compact component of {d >= l}
    containing cell p exists exactly when bottleneck(p) < l <= d(p).
    """
    step = 0.5 * f.h_r
    min_depth = 2.0 * f.h_r if min_depth is None else min_depth
    d = f.d
    b = bottleneck(f)
    first = np.floor(b / step) + 1.0  # first scan index strictly above b
    ok = (first * step <= d - min_depth) & (b < d)
    if not ok.any():
        return CollarWidth(f.metric.r_max, True, step, None)
    k = float(first[ok].min())
    return CollarWidth((k - 1.0) * step, False, step, k * step)


def sweep_levels(f: DistanceField, step: float | None = None) -> np.ndarray:
    """Levels from hR/2 up to one cell below the lowest distance on the top row."""
    step = 0.5 * f.h_r if step is None else step
    top = float(f.d[-1].min()) - f.h_r
    return np.arange(step, top, step)


@dataclass(frozen=True)
class ThinReport:
    is_thin: bool
    lam: float
    worst_level: float
    worst_length: float
    min_level: float
    min_length: float
    levels: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)


def lambda_thin(f: DistanceField, lam: float, step: float | None = None) -> ThinReport:
    """Length of the infinite-component boundary at every swept level, compared with ``lam``."""
    lv = sweep_levels(f, step)
    lengths = np.empty(lv.size)
    for i, level in enumerate(lv):
        om = omega_curve(level_curves(f, level))
        lengths[i] = om.length if om is not None else np.nan
    i_max = int(np.nanargmax(lengths))
    i_min = int(np.nanargmin(lengths))
    tol = 1e-9 * max(lam, 1.0)
    return ThinReport(bool(np.all(lengths <= lam + tol)), lam, float(lv[i_max]), float(lengths[i_max]),
                      float(lv[i_min]), float(lengths[i_min]), lv, lengths)


@dataclass(frozen=True)
class LevelCheck:
    level: float
    curves: int
    simple: bool
    winding: int
    passed: bool


@dataclass(frozen=True)
class ThinCylinderReport:
    status: str  # pass, fail or inapplicable
    k: float
    loop_bound: float
    worst_length: float
    levels: list[LevelCheck]

    @property
    def failures(self) -> int:
        return sum(not c.passed for c in self.levels)


def thin_cylinder_check(m: FermiMetric, n_r: int = 512, n_theta: int = 256, step: float | None = None,
                        field_: DistanceField | None = None) -> ThinCylinderReport:
    """Every level of a thin cylinder is a single simple closed curve winding once."""
    f = field_ if field_ is not None else solve_eikonal(m, n_r, n_theta)
    k = curvature_lower_bound(m).k
    bound = cactus_loop_bound(k)
    thin = lambda_thin(f, bound, step)
    if not thin.worst_length < bound:
        return ThinCylinderReport("inapplicable", k, bound, thin.worst_length, [])
    checks = []
    for level in thin.levels:
        cs = level_curves(f, level)
        c = cs[0] if cs else None
        ok = (len(cs) == 1 and c.closed and c.simple and c.winding == 1 and c.component_class != COMPACT)
        checks.append(LevelCheck(float(level), len(cs), bool(c is not None and c.simple),
                                 c.winding if c is not None else 0, ok))
    status = "pass" if all(c.passed for c in checks) else "fail"
    return ThinCylinderReport(status, k, bound, thin.worst_length, checks)
