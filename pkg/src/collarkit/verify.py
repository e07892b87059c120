"""Acceptance checks with pinned seeds, shared by ``collarkit verify`` and the test suite.

Every check returns one or more :class:`CheckResult` records.  ``value``
is the worst measured quantity and ``bound`` the threshold it is held to;
``relation`` says which side of the bound passes.  Runtimes are kept out of
the report lines so that reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .collar import (
    cactus_loop_bound,
    collar_width_bound,
    corollary_b_gap_array,
    lemma8_gap,
    trigineq_constant,
    width_arccosh_coth,
    width_arcsinh_cosech,
)
from .comparison import (
    compare_right_hypotenuse,
    compare_right_leg_angle,
    compare_right_legs,
    compare_right_opposite,
    flip_flop_bounds,
    flip_flop_suite,
    open_triangle_finite_bound,
    run_flip_flop,
    toponogov_a,
)
from .distfield import (
    classify_types,
    lipschitz_check,
    measured_collar_width,
    omega_curve,
    level_curves,
    open_quadrilateral_check,
    shortest_homotopic_loop,
    solve_eikonal,
    thin_cylinder_check,
)
from .distfield.export import check_line, fmt
from .hypcore import beta_inf
from .surface import (
    SmoothingParams,
    bump_suite,
    cactus_suite,
    collar_suite,
    constant_curvature,
    curvature_lower_bound,
    gentle_suite,
    presets,
    sample_triangles,
    smoothing_transform,
)

STATUSES = ("pass", "fail", "inapplicable", "unverified")


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    value: float
    bound: float
    tolerance: float
    relation: str  # "<=" or ">=": value relation bound passes
    runtime: float = 0.0
    note: str = ""

    def line(self) -> str:
        return check_line(self.name, self.status, self.value, self.bound)


@dataclass
class SuiteReport:
    results: list[CheckResult] = field(default_factory=list)
    seed: int = 0

    @property
    def failed(self) -> list[CheckResult]:
        return [r for r in self.results if r.status == "fail"]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def text(self) -> str:
        return "".join(r.line() + "\n" for r in self.results)

    def table(self) -> str:
        """Aligned table for terminals; runtime excluded to keep output deterministic."""
        rows = [("check", "status", "value", "rel", "bound", "tol")]
        rows += [(r.name, r.status, fmt(r.value), r.relation, fmt(r.bound), fmt(r.tolerance)) for r in self.results]
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        return "".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n" for row in rows)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _res(name, value, bound, tol, relation, ok=None, note=""):
    value, bound = float(value), float(bound)
    if ok is None:
        ok = value <= bound if relation == "<=" else value >= bound
    return CheckResult(name, _status(bool(ok)), value, bound, tol, relation, note=note)


def aggregate(results: list[CheckResult]) -> str:
    s = {r.status for r in results}
    if "fail" in s:
        return "fail"
    if "unverified" in s:
        return "unverified"
    if s == {"inapplicable"}:
        return "inapplicable"
    return "pass"


# --- closed forms ------------------------------------------------------------


def check_collar_identity(rng, scale):
    x = np.geomspace(1e-3, 20.0, 10_000)
    err = max(abs(width_arccosh_coth(v) - width_arcsinh_cosech(v)) for v in x)
    return [_res("collar-identity", err, 1e-12 * scale, 1e-12 * scale, "<=", err < 1e-12 * scale)]


def check_lemma8(rng, scale):
    n = 1_000_000
    x = rng.uniform(0.0, 5.0, n)
    y = rng.uniform(0.0, 5.0, n)
    delta = x * rng.uniform(-1.0, 1.0, n)
    t = y * rng.uniform(0.0, 1.0, n)
    gap = lemma8_gap(x, y, delta, t)
    strict = (delta > 0.0) & (t > 0.0) & (np.abs(delta * t) >= 1e-6)
    lo = float(gap[strict].min())
    return [
        _res("lemma8.nonnegative", gap.min(), -1e-12 * scale, 1e-12 * scale, ">="),
        _res("lemma8.strict", lo, 1e-15, 1e-15, ">=", lo > 1e-15, note=f"subset={int(strict.sum())}"),
    ]


def check_corollary_b(rng, scale):
    tol = 1e-12 * scale
    n = 100_000
    u1, u2, v1, v2 = (rng.uniform(0.0, 4.0, n) for _ in range(4))
    gap, eq = corollary_b_gap_array(u1, u2, v1, v2)
    # adversarial: the three equality families and perturbations of each
    m = 125
    u = rng.uniform(0.05, 3.0, m)
    v = rng.uniform(0.05, 3.0, m)
    w = rng.uniform(0.05, 3.0, m)
    z = np.zeros(m)
    eps = 10.0 ** rng.uniform(-9.0, -5.0, m)
    exact = [(z, z, v, w), (u, w, z, z), (u, u, v, v), (u, u, w, w)]
    near = [(z, eps, v, w), (u, w, z, eps), (u, u * (1 + eps), v, v), (u, u, w, w * (1 + eps))]
    g_eq, f_eq = corollary_b_gap_array(*(np.concatenate(c) for c in zip(*exact)))
    g_nr, f_nr = corollary_b_gap_array(*(np.concatenate(c) for c in zip(*near)))
    pos = np.concatenate([gap, g_nr])
    flagged_wrong = int(eq.sum() + f_nr.sum() + (~f_eq).sum())
    worst_eq = float(np.abs(g_eq).max())
    return [
        _res("corollary-b.equality", worst_eq, tol, tol, "<=", worst_eq <= tol and f_eq.all(),
             note=f"samples={g_eq.size}"),
        _res("corollary-b.strict", pos.min(), 0.0, 0.0, ">=", pos.min() > 0.0 and flagged_wrong == 0,
             note=f"samples={pos.size} misclassified={flagged_wrong}"),
    ]


def _angles_of(tri):
    ref = toponogov_a(*tri.sides)
    return np.array([ref.alpha, ref.beta, ref.gamma]), tri.angles


def _triangles(m, rng, n):
    L = m.boundary_length
    c = np.column_stack([rng.uniform(0.8, 2.5, n), rng.uniform(0.0, L, n)])
    return sample_triangles(m, c[:, None, :] + rng.uniform(-0.5, 0.5, (n, 3, 2)))


def check_toponogov(rng, scale):
    tol = 1e-3 * scale
    out = []
    tris = _triangles(presets()["funnel"], rng, 200)
    bad = sum(not t.ok for t in tris)
    err = max(float(np.abs(np.subtract(*_angles_of(t))).max()) for t in tris if t.ok)
    out.append(_res("toponogov.funnel", err, tol, tol, "<=", err < tol and bad == 0, note=f"unconnected={bad}"))
    for name, m in list(gentle_suite().items())[:3]:
        tris = _triangles(m, rng, 60)
        bad = sum(not t.ok for t in tris)
        excess = max(float(np.max(np.subtract(*_angles_of(t)))) for t in tris if t.ok)
        out.append(_res(f"toponogov.{name}", excess, tol, tol, "<=", excess <= tol and bad == 0,
                        note=f"unconnected={bad}"))
    return out


def check_right_comparison(rng, scale):
    tol = 1e-10 * scale
    n = 10_000
    a = rng.uniform(0.05, 3.0, n)
    b = rng.uniform(0.05, 3.0, n)
    rel = lambda u, v: abs(u - v) / max(1.0, abs(v))
    worst = 0.0
    for ai, bi in zip(a, b):
        t = compare_right_legs(ai, bi)
        la = compare_right_leg_angle(ai, t.beta)
        op = compare_right_opposite(bi, t.beta)
        hc = compare_right_hypotenuse(t.beta, c=t.c)
        hb = compare_right_hypotenuse(t.beta, b=bi)
        worst = max(worst, rel(la.b, bi), rel(la.c, t.c), rel(op.a, ai), rel(hc.a, ai), rel(hc.b, bi),
                    rel(hb.c, t.c), rel(hb.a, ai))
    # open-ended threshold located by bisection on the reported flag
    thr = 0.0
    for ai in rng.uniform(0.05, 3.0, 200):
        lo, hi = 1e-6, 0.5 * math.pi - 1e-12
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if compare_right_leg_angle(ai, mid).open_ended:
                hi = mid
            else:
                lo = mid
        thr = max(thr, abs(math.tan(hi) * math.sinh(ai) - 1.0))
    return [
        _res("right-comparison.round-trip", worst, tol, tol, "<="),
        _res("right-comparison.threshold", thr, 1e-9 * scale, 1e-9 * scale, "<="),
    ]


def check_flip_flop(rng, scale):
    tol = 1e-9 * scale
    err = mono = viol = 0.0
    notconv = []
    for i, cfg in enumerate(flip_flop_suite()):
        run = run_flip_flop(cfg, max_steps=20_000)
        err = max(err, run.final_error)
        if not run.converged:
            notconv.append(f"{i}:{cfg.label}")
        s = np.array([x.s for x in run.states])
        mono = max(mono, float(np.max(np.diff(s), initial=0.0)))
        for phi, ratio_bound, crit in flip_flop_bounds(run):
            viol = max(viol, ratio_bound - phi, crit - phi)
    return [
        _res("flip-flop.converged", err, 1e-6, 1e-6, "<=", not notconv,
             note="not converged: " + ",".join(notconv) if notconv else ""),
        _res("flip-flop.monotone", mono, 0.0, 0.0, "<="),
        _res("flip-flop.bounds", viol, tol, tol, "<="),
    ]


def check_open_triangle_limit(rng, scale):
    tol = 1e-6 * scale
    err = 0.0
    drop = 0.0
    for a in (0.1, 0.5, 1.0, 2.0, math.asinh(1.0)):
        vals = np.array([open_triangle_finite_bound(a, a + s) for s in np.linspace(0.0, 8.0, 801)])
        drop = max(drop, float(np.max(-np.diff(vals))))
        err = max(err, abs(vals[-1] - beta_inf(a)))
    pi4 = abs(beta_inf(math.asinh(1.0)) - 0.25 * math.pi)
    return [
        _res("open-triangle-limit.approach", err, tol, tol, "<="),
        _res("open-triangle-limit.monotone", drop, 0.0, 0.0, "<="),
        _res("open-triangle-limit.pi4", pi4, 1e-15, 1e-15, "<="),
    ]


def check_smoothing(rng, scale):
    out = []
    for name, m in (("bump", presets()["bump"]), ("gentle-modulated", gentle_suite()["gentle-modulated"])):
        infs, ratio, margin, ok = [], 0.0, math.inf, True
        for delta in (0.1, 0.05, 0.01):
            _, rep = smoothing_transform(m, SmoothingParams(delta, 0.2))
            ok &= rep.holds
            ratio = max(ratio, (rep.ratio_max - 1.0) / (rep.ratio_bound - 1.0),
                        rep.dphi_max / rep.term_bound, rep.ddphi_max / rep.term_bound)
            margin = min(margin, rep.inf_k_smoothed - (rep.inf_k - 10.0 * delta * rep.kappa))
            infs.append(rep.inf_k_smoothed)
        step = float(np.min(np.diff(infs)))
        capped = infs[-1] <= rep.inf_k + 1e-12 * scale
        out.append(_res(f"smoothing.{name}.bounds", ratio, 1.0, 0.0, "<=", ok and ratio < 1.0))
        out.append(_res(f"smoothing.{name}.curvature", margin, 0.0, 0.0, ">="))
        out.append(_res(f"smoothing.{name}.monotone", step, 0.0, 0.0, ">=", step > 0.0 and capped,
                        note=f"inf_k={rep.inf_k:.10g}"))
    return out


def check_trigineq(rng, scale):
    a0, b0, c0 = 3.0, 1.0, 0.5
    tb = trigineq_constant(a0, b0, c0)
    worst = -math.inf
    checked = 0
    while checked < 100_000:
        m = 200_000
        a = rng.uniform(0.0, a0, m)
        b = rng.uniform(1e-4, b0, m)
        gamma = rng.uniform(0.01, math.pi - 0.01, m)
        # law of cosines in the half-angle form, stable for small sides
        h = np.sinh(0.5 * (a - b))
        y = 2 * h * h + np.sinh(a) * np.sinh(b) * 2 * np.sin(0.5 * gamma) ** 2
        c = np.log1p(y + np.sqrt(y * (2 + y)))
        keep = c >= c0
        a, b, c, gamma = a[keep], b[keep], c[keep], gamma[keep]
        zeta = np.maximum(gamma - 0.5 * math.pi, 0.0)
        worst = max(worst, float(np.max(c - a - tb.C * (b * np.sin(zeta) + b * b))))
        checked += int(keep.sum())
    tol = 1e-12 * scale
    return [_res("trigineq", worst, tol, tol, "<=", note=f"C={tb.C:.10g}")]


# --- distance-field checks ---------------------------------------------------


def width_status(w, bound: float, r_max: float) -> str:
    """A width truncated at rMax cannot be compared with a bound beyond rMax."""
    if w.width >= bound:
        return "pass"
    return "unverified" if w.unbounded and bound > r_max else "fail"


def check_collar_width(rng, scale, n_r=512, n_theta=256):
    out = []
    for name, m in collar_suite().items():
        f = solve_eikonal(m, n_r, n_theta)
        k = curvature_lower_bound(m).k
        w = measured_collar_width(f)
        bound = collar_width_bound(m.boundary_length, k).width - 3.0 * f.h_r * scale
        note = f"k={k:.6g}" + (" unbounded" if w.unbounded else "")
        out.append(CheckResult(f"collar-width.{name}", width_status(w, bound, m.r_max), w.width, bound,
                               3.0 * f.h_r * scale, ">=", note=note))
    return out


def check_cactus_loop(rng, scale, n_r=512, n_theta=256, points=10):
    out = []
    for name, m in cactus_suite().items():
        f = solve_eikonal(m, n_r, n_theta)
        k = curvature_lower_bound(m).k
        dec = classify_types(f)
        cells = np.argwhere((dec.labels > 0) & (np.arange(n_r)[:, None] > 0) & (np.arange(n_r)[:, None] < n_r - 1))
        if not dec.arms or cells.size == 0:
            out.append(CheckResult(f"cactus-loop.{name}", "unverified", math.nan, math.nan, 0.08, ">=",
                                   note="no arm found"))
            continue
        pick = cells[rng.choice(len(cells), size=min(points, len(cells)), replace=False)]
        shortest = min(shortest_homotopic_loop(f, m, tuple(p)).length for p in pick)
        bound = cactus_loop_bound(k) * (1.0 - 0.08 * scale)
        out.append(_res(f"cactus-loop.{name}", shortest, bound, 0.08 * scale, ">=",
                        note=f"k={k:.6g} arms={len(dec.arms)}"))
    return out


def check_thin_cylinder(rng, scale, n_r=512, n_theta=256):
    out = []
    for name in ("thin", "waisted"):
        rep = thin_cylinder_check(presets()[name], n_r, n_theta)
        out.append(CheckResult(f"thin-cylinder.{name}", rep.status, rep.worst_length, rep.loop_bound, 0.0, "<=",
                               note=f"levels={len(rep.levels)} failures={rep.failures}"))
    return out


def _omega_at(f, level):
    return omega_curve(level_curves(f, level))


def check_regularity(rng, scale, levels=(1.2, 2.4)):
    out = []
    ratio, tangent = 0.0, 0.0
    for name, m in bump_suite().items():
        f = solve_eikonal(m, 512, 256)
        for level in levels:
            rep = lipschitz_check(_omega_at(f, level), m, f)
            ratio = max(ratio, rep.max_ratio)
            tangent = max(tangent, rep.tangent.median_error)
    out.append(_res("regularity.lipschitz-512", ratio, 1.3 * scale, 0.0, "<="))
    out.append(_res("regularity.tangent", tangent, 0.05 * scale, 0.0, "<=", tangent < 0.05 * scale))
    m = presets()["bump"]
    f = solve_eikonal(m, 1024, 512)
    rep = lipschitz_check(_omega_at(f, levels[0]), m, f)
    out.append(_res("regularity.lipschitz-1024", rep.max_ratio, 1.25 * scale, 0.0, "<="))
    return out


def quadrilateral_suite() -> dict:
    """Metrics with K >= -1 whose quadrilaterals are followed out to r = 12."""
    ms = {"constant-k1": constant_curvature(1.0, 2.0, r_max=12.0)}
    ms.update(gentle_suite())
    return ms


def check_open_quadrilateral(rng, scale, samples=10, extremal=2):
    out = []
    for i, (name, m) in enumerate(quadrilateral_suite().items()):
        rep = open_quadrilateral_check(m, samples, seed=int(rng.integers(2**31)), extremal=extremal)
        n_acc = len(rep.accepted) + sum(q.open_ended for q in rep.extremal)
        if n_acc == 0:
            out.append(CheckResult(f"open-quadrilateral.{name}", "unverified", math.nan, 0.95, 0.0, ">=",
                                   note="no accepted configuration"))
            continue
        out.append(_res(f"open-quadrilateral.{name}", rep.min_product, 0.95 * scale, 0.0, ">=",
                        note=f"accepted={n_acc}"))
    return out


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    run: callable
    budget: float  # seconds


CRITERIA = (
    Criterion(1, "collar-identity", check_collar_identity, 1.0),
    Criterion(2, "lemma8", check_lemma8, 10.0),
    Criterion(3, "corollary-b", check_corollary_b, 5.0),
    Criterion(4, "toponogov", check_toponogov, 120.0),
    Criterion(5, "right-comparison", check_right_comparison, 5.0),
    Criterion(6, "flip-flop", check_flip_flop, 30.0),
    Criterion(7, "open-triangle-limit", check_open_triangle_limit, 1.0),
    Criterion(8, "smoothing", check_smoothing, 30.0),
    Criterion(9, "trigineq", check_trigineq, 10.0),
    Criterion(10, "collar-width", check_collar_width, 300.0),
    Criterion(11, "cactus-loop", check_cactus_loop, 120.0),
    Criterion(12, "thin-cylinder", check_thin_cylinder, 120.0),
    Criterion(13, "regularity", check_regularity, 180.0),
    Criterion(14, "open-quadrilateral", check_open_quadrilateral, 120.0),
)
BY_NAME = {c.name: c for c in CRITERIA}


def run_criterion(c: Criterion, seed: int = 0, scale: float = 1.0) -> list[CheckResult]:
    """Run one criterion with its own stream derived from ``seed``; runtime is attached to each record."""
    rng = np.random.default_rng([seed, c.number])
    t0 = time.perf_counter()
    res = c.run(rng, scale)
    dt = time.perf_counter() - t0
    return [CheckResult(r.name, r.status, r.value, r.bound, r.tolerance, r.relation, dt, r.note) for r in res]


def run_suite(only=None, seed: int = 0, scale: float = 1.0, progress=None) -> SuiteReport:
    names = list(only) if only else [c.name for c in CRITERIA]
    unknown = [n for n in names if n not in BY_NAME]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; known: {', '.join(BY_NAME)}")
    report = SuiteReport(seed=seed)
    for n in names:
        res = run_criterion(BY_NAME[n], seed, scale)
        report.results.extend(res)
        if progress is not None:
            progress(BY_NAME[n], res)
    return report
