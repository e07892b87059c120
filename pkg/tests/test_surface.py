import math

import numpy as np
import pytest
from scipy import optimize

from collarkit.comparison import toponogov_a
from collarkit.distfield import solve_eikonal
from collarkit.hypcore import HypDomainError
from collarkit.surface import (
    Bump,
    SmoothingParams,
    bump_metric,
    cactus_metric,
    chi,
    constant_curvature,
    curvature_lower_bound,
    flat_cylinder,
    gauss_curvature,
    gentle_suite,
    geodesic_shoot,
    minimal_connection,
    minimal_connections,
    presets,
    sample_triangle,
    sample_triangles,
    smoothing_transform,
)


def all_metrics():
    return list(presets().values()) + list(gentle_suite().values())


def test_curvature_closed_forms():
    r = np.linspace(0.0, 5.0, 50)
    t = np.linspace(0.0, 2.0, 50)
    for k in (0.3, 1.0, 2.0):
        m = constant_curvature(k, 2.0, r_max=6.0)
        assert np.allclose(gauss_curvature(m, r, t), -k * k, atol=1e-12)
    assert np.all(gauss_curvature(flat_cylinder(1.0), r, t) == 0.0)


def test_curvature_matches_finite_differences():
    # second-order differences of the metric functions, general formula with A != 1
    m = presets()["bump"]

    def A(x, y):
        return float(m.A(x, y))

    def G(x, y):
        return float(m.G(x, y))

    def fd(r, t, h):
        Gr = lambda x, y: (G(x + h, y) - G(x - h, y)) / (2 * h)
        At = lambda x, y: (A(x, y + h) - A(x, y - h)) / (2 * h)
        d_r = (Gr(r + h, t) / A(r + h, t) - Gr(r - h, t) / A(r - h, t)) / (2 * h)
        d_t = (At(r, t + h) / G(r, t + h) - At(r, t - h) / G(r, t - h)) / (2 * h)
        return -(d_r + d_t) / (A(r, t) * G(r, t))

    for r, t in [(1.2, 1.0), (1.0, 0.8), (1.5, 1.3), (0.9, 1.1)]:
        # Richardson extrapolation removes the h^2 term
        ref = (4 * fd(r, t, 1e-4) - fd(r, t, 2e-4)) / 3
        assert float(gauss_curvature(m, r, t)) == pytest.approx(ref, abs=1e-6)


def test_curvature_lower_bound_examples():
    assert curvature_lower_bound(constant_curvature(1.0, 2.0, r_max=4.0)).k == pytest.approx(1.0, abs=1e-9)
    cb = curvature_lower_bound(flat_cylinder(2.0))
    assert cb.floored and cb.k == 1e-6


def test_curvature_lower_bound_ring_bump():
    # rotational ring bump on a flat base: K(r) = -P''/(1 + amp P), minimized independently
    amp, r0, sr = 0.3, 1.5, 0.6
    m = bump_metric(0.0, 2.0, [Bump(r0, sr, amp_g=amp)], r_max=4.0)

    def K(r):
        u = (r - r0) / sr
        w = 1 - u * u
        return -amp * w * w * (56 * u * u - 8) / sr**2 / (1 + amp * w**4)

    ref = optimize.minimize_scalar(K, bounds=(r0 - sr, r0 + sr), method="bounded", options={"xatol": 1e-12})
    assert curvature_lower_bound(m, n_r=1024, n_theta=16).inf_k == pytest.approx(ref.fun, abs=1e-6)


def test_family_invariants():
    for m in all_metrics():
        assert m.check_invariants() < 1e-14
        r = np.linspace(0.0, 0.1, 40)
        R, T = np.meshgrid(r, np.linspace(0.0, m.boundary_length, 64, endpoint=False), indexing="ij")
        kappa = curvature_lower_bound(m, n_r=256, n_theta=128).k
        G = m.G(R, T)
        # the collar sits below every bump, so G grows like cosh of the base curvature there
        kap = max(kappa, m.k)
        assert np.all(G <= 1 + kap**2 * R**2 + 1e-15)
        assert np.all(G >= 1 - kap**2 * R**2 - 1e-15)


def test_family_rejections():
    with pytest.raises(HypDomainError):
        bump_metric(1.0, 2.0, [Bump(0.3, 0.5, amp_g=0.1)])
    with pytest.raises(HypDomainError):
        bump_metric(1.0, 2.0, [Bump(1.0, 0.5, amp_a=-1.0)])


def test_radial_geodesics():
    for m in all_metrics():
        if not m.is_fermi():
            continue
        p = geodesic_shoot(m, (0.2, 0.7), 0.0, 2.0)
        assert np.abs(p.t - 0.7).max() < 1e-12
        assert np.abs(p.r - (0.2 + p.s)).max() < 1e-9


def test_clairaut_and_speed_on_funnel():
    # geodesic at height sinh r = 0.05 cosh s about its lowest point, traversed over s in [-5, 5]
    m = constant_curvature(1.0, 2.0, r_max=12.0)
    r0 = math.asinh(0.05 * math.cosh(5.0))
    psi = math.acos(-0.05 * math.sinh(5.0) / math.cosh(r0))
    p = geodesic_shoot(m, (r0, 0.3), psi, 10.0, samples=401)
    assert not p.truncated
    assert p.r.min() == pytest.approx(math.asinh(0.05), abs=1e-8) and p.r[-1] == pytest.approx(r0, abs=1e-8)
    c = p.clairaut(m)
    assert np.abs(c - c[0]).max() < 1e-8
    assert p.speed_error(m) < 1e-8


def test_boundary_geodesic_closes():
    for m in all_metrics():
        p = geodesic_shoot(m, (0.0, 0.2), 0.5 * math.pi, m.boundary_length)
        assert abs(p.r[-1]) < 1e-8
        assert abs(p.t[-1] - 0.2 - m.boundary_length) < 1e-8


def test_reversibility():
    rng = np.random.default_rng(11)
    for m in all_metrics():
        for _ in range(3):
            start = (rng.uniform(0.8, 2.0), rng.uniform(0.0, m.boundary_length))
            psi, ell = rng.uniform(0, 2 * math.pi), 1.0
            p = geodesic_shoot(m, start, psi, ell)
            if p.truncated:
                continue
            j = m.jet(p.r[-1], p.t[-1])
            back = math.atan2(-float(j.G * p.vt[-1]), -float(j.A * p.vr[-1]))
            q = geodesic_shoot(m, (p.r[-1], p.t[-1]), back, ell)
            assert abs(q.r[-1] - start[0]) < 1e-6 * ell
            assert abs(q.t[-1] - start[1]) < 1e-6 * ell
            assert p.speed_error(m) < 1e-8


def test_minimal_connection_rotational():
    for m in (presets()["funnel"], presets()["flat"]):
        for d in (0.3, 1.0, 2.5):
            c = minimal_connection(m, (d, 0.4))
            assert c.dist == pytest.approx(d, abs=1e-9)
            assert np.abs(c.path.t - 0.4).max() < 1e-9
            assert c.foot_angle < 1e-4


def test_minimal_connection_bends_around_tall_bump():
    m = presets()["cactus"]
    f = solve_eikonal(m, 512, 256)
    p = (2.5, 1.5)
    c = minimal_connection(m, p, field=f)
    assert c.dist < p[0] * 1.2 and c.dist < float(np.trapezoid(m.A(np.linspace(0, p[0], 2001), p[1]), dx=p[0] / 2000))
    assert abs(c.dist - float(f.sample(*p))) < 2 * f.h_r
    assert c.foot_angle < 1e-4


def test_eikonal_consistency_random_probes():
    rng = np.random.default_rng(12)
    for m in (presets()["bump"], cactus_metric(3.0, [(1.3, 1.5, 0.8, 3.0)])):
        f = solve_eikonal(m, 512, 256)
        pts = np.column_stack([rng.uniform(0.1, m.r_max - 0.5, 50), rng.uniform(0, m.boundary_length, 50)])
        cs = minimal_connections(m, pts, field=f)
        d = np.array([c.dist for c in cs])
        assert np.abs(d - f.sample(pts[:, 0], pts[:, 1])).max() <= 3 * f.h_r
        assert max(c.foot_angle for c in cs) < 1e-4


def test_tiny_triangle_is_euclidean():
    for m in all_metrics():
        tri = sample_triangle(m, [(1.0, 0.5), (1.0005, 0.5), (1.0, 0.5006)])
        assert tri.ok
        assert tri.angles.sum() == pytest.approx(math.pi, abs=1e-5)


def test_triangles_on_funnel_match_hyperbolic():
    m = presets()["funnel"]
    rng = np.random.default_rng(13)
    c = np.column_stack([rng.uniform(0.8, 2.5, 40), rng.uniform(0.0, 2.0, 40)])
    verts = c[:, None, :] + rng.uniform(-0.5, 0.5, (40, 3, 2))
    for tri in sample_triangles(m, verts):
        assert tri.ok
        ref = toponogov_a(*tri.sides)
        assert np.abs(np.array([ref.alpha, ref.beta, ref.gamma]) - tri.angles).max() < 1e-4


def test_toponogov_on_gentle_bumps():
    rng = np.random.default_rng(14)
    for m in list(gentle_suite().values())[:3]:
        c = np.column_stack([rng.uniform(0.9, 2.8, 30), rng.uniform(0.0, 2.0, 30)])
        verts = c[:, None, :] + rng.uniform(-0.5, 0.5, (30, 3, 2))
        for tri in sample_triangles(m, verts):
            assert tri.ok
            ref = toponogov_a(*tri.sides)
            assert np.all(np.array([ref.alpha, ref.beta, ref.gamma]) <= tri.angles + 1e-3)


def test_chi_shape():
    x = np.linspace(-1.0, 2.0, 3001)
    c, c1, c2 = chi(x)
    assert np.all(c[x <= 0.25] == 0.0) and np.all(c[x >= 0.75] == 1.0)
    assert np.all(np.diff(c) >= 0.0)
    assert c1.max() == pytest.approx(3.75, abs=1e-6)
    assert np.abs(c2).max() == pytest.approx(40 / math.sqrt(3), rel=1e-4)
    h = 1e-6
    xs = np.linspace(0.3, 0.7, 9)
    assert np.allclose((chi(xs + h)[0] - chi(xs - h)[0]) / (2 * h), chi(xs)[1], atol=1e-7)


def test_smoothing_params():
    sp = SmoothingParams(0.01, 0.2)
    assert sp.v == pytest.approx(1e-200, rel=1e-10)
    x = np.concatenate([np.geomspace(1e-210, 0.3, 4000)])
    p, _, _ = sp.phi(x)
    assert np.all(p[x <= sp.v / 4] == 0.0) and np.all(p[x >= 0.75 * sp.w] == 1.0)
    assert np.all((p >= 0.0) & (p <= 1.0))
    with pytest.raises(HypDomainError):
        SmoothingParams(0.5, 0.3)
    with pytest.raises(HypDomainError):
        SmoothingParams(0.9, 0.2)  # v = 0.89 > w


def test_smoothing_flat_input_is_identity():
    m = flat_cylinder(2.0)
    mt, rep = smoothing_transform(m, SmoothingParams(0.05, 0.2))
    r = np.linspace(0.0, 1.0, 50)
    assert np.all(mt.G(r, 0.3) == 1.0)
    assert rep.holds and rep.inf_k_smoothed == 0.0


def test_smoothing_exact_outside_transition():
    m = gentle_suite()["gentle-modulated"]
    sp = SmoothingParams(0.2, 0.2)
    mt, _ = smoothing_transform(m, sp)
    t = np.linspace(0.0, 2.0, 17)
    r_in = np.geomspace(1e-12, 0.25 * sp.v, 20)
    R, T = np.meshgrid(r_in, t, indexing="ij")
    assert np.all(mt.G(R, T) == 1.0)
    r_out = np.linspace(0.75 * sp.w, 3.0, 40)
    R, T = np.meshgrid(r_out, t, indexing="ij")
    assert np.allclose(mt.G(R, T), m.G(R, T), rtol=0, atol=1e-15)


def test_smoothing_jet_matches_finite_differences():
    m = gentle_suite()["gentle-modulated"]
    mt, _ = smoothing_transform(m, SmoothingParams(0.3, 0.2))
    h = 1e-5
    # away from the joints w/4, 3w/4 where the quintic's third derivative jumps
    x = np.array([0.03, 0.06, 0.08, 0.11, 0.13, 0.17, 0.19])
    t = 0.4
    j = mt.jet(x, t)
    G = lambda r, s: mt.G(r, s)
    assert np.allclose((G(x + h, t) - G(x - h, t)) / (2 * h), j.G_r, atol=1e-8)
    assert np.allclose((G(x, t + h) - G(x, t - h)) / (2 * h), j.G_t, atol=1e-8)
    h = 1e-4
    assert np.allclose((G(x + h, t) - 2 * G(x, t) + G(x - h, t)) / h**2, j.G_rr, atol=1e-4)


def test_smoothing_bounds_and_convergence():
    for m in (presets()["bump"], gentle_suite()["gentle-modulated"]):
        infs = []
        for delta in (0.1, 0.05, 0.01):
            _, rep = smoothing_transform(m, SmoothingParams(delta, 0.2))
            assert rep.holds
            assert rep.inf_k_smoothed >= rep.inf_k - 10 * delta * rep.kappa
            infs.append(rep.inf_k_smoothed)
        assert infs[0] < infs[1] < infs[2] <= rep.inf_k + 1e-12


def test_smoothing_rejections():
    with pytest.raises(HypDomainError):
        smoothing_transform(bump_metric(1.0, 2.0, [Bump(0.3, 0.15, amp_g=0.1)]), SmoothingParams(0.1, 0.2))
    # |g| reaches 1/2 inside [0, w] for a very negatively curved base
    with pytest.raises(HypDomainError):
        smoothing_transform(constant_curvature(8.0, 2.0), SmoothingParams(0.1, 0.2))
