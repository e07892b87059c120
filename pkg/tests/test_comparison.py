import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collarkit.comparison import (
    FlipFlopConfigError,
    OpenTriangleConfig,
    RayRelation,
    asymptotic_config,
    compare_right_hypotenuse,
    compare_right_leg_angle,
    compare_right_legs,
    compare_right_opposite,
    flip_flop_bounds,
    flip_flop_suite,
    open_triangle_angle_bound,
    open_triangle_finite_bound,
    run_flip_flop,
    toponogov_a,
    toponogov_b,
    ultraparallel_config,
)
from collarkit.hypcore import HypDomainError, beta_inf, solve_right_triangle

# mpmath references
EQUI_GAMMA = 0.918797872178027369036733054549
LEGS_11_C = 1.51337400659650395980401187573
CR2_B = 0.5318372915866200738608935183
CR3_A = 0.732988688954796226792736474326
HYP_B = 0.756687003298251979902005937863
BETA_INF_2 = 0.269035990748881519355165428274


def test_toponogov_a_equilateral():
    t = toponogov_a(1.0, 1.0, 1.0)
    for ang in (t.alpha, t.beta, t.gamma):
        assert ang == pytest.approx(EQUI_GAMMA, abs=1e-14)


def test_toponogov_a_collapse_and_infeasible():
    t = toponogov_a(1e-7, 2.0, 2.0)
    assert t.alpha < 1e-6
    assert t.beta == pytest.approx(math.pi / 2, abs=1e-6)
    assert t.gamma == pytest.approx(math.pi / 2, abs=1e-6)
    with pytest.raises(HypDomainError):
        toponogov_a(2.0, 1.0, 1.0)


def test_toponogov_a_residuals():
    rng = np.random.default_rng(8)
    for _ in range(500):
        a, b = rng.uniform(0.05, 4.0, 2)
        c = rng.uniform(abs(a - b) + 1e-3, a + b - 1e-3)
        t = toponogov_a(a, b, c)
        for x, y, z, ang in [(b, c, a, t.alpha), (a, c, b, t.beta), (a, b, c, t.gamma)]:
            res = math.cosh(z) - (math.cosh(x) * math.cosh(y) - math.sinh(x) * math.sinh(y) * math.cos(ang))
            assert abs(res) < 1e-10 * math.cosh(z)
            assert 0.0 < ang < math.pi


def test_toponogov_b_examples():
    assert toponogov_b(0.7, 1.1, math.pi / 2).c == pytest.approx(math.acosh(math.cosh(0.7) * math.cosh(1.1)), abs=1e-13)
    assert toponogov_b(0.7, 1.1, math.pi - 1e-9).c == pytest.approx(1.8, abs=1e-8)
    assert toponogov_b(1.0, 1.0, EQUI_GAMMA).c == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(0.05, 4.0), st.floats(0.01, 0.99))
def test_toponogov_round_trip(a, b, frac):
    lo, hi = abs(a - b), a + b
    c = lo + frac * (hi - lo)
    if not (c > lo + 1e-6 and c < hi - 1e-6):
        return
    t = toponogov_a(a, b, c)
    assert toponogov_b(a, b, t.gamma).c == pytest.approx(c, abs=1e-10)


def test_compare_right_legs():
    r = compare_right_legs(1.0, 1.0)
    assert r.alpha == pytest.approx(r.beta, abs=1e-15)
    assert r.c == pytest.approx(LEGS_11_C, abs=1e-14)
    r = compare_right_legs(0.4, 1.7)
    ref = solve_right_triangle(a=0.4, b=1.7)
    for key in ("a", "b", "c", "alpha", "beta"):
        assert getattr(r, key) == pytest.approx(getattr(ref, key), abs=1e-12)


def test_compare_right_leg_angle():
    r = compare_right_leg_angle(1.0, math.pi / 8)
    assert r.b == pytest.approx(CR2_B, abs=1e-14)
    r = compare_right_leg_angle(1.0, beta_inf(1.0))
    assert r.open_ended and math.isinf(r.b) and math.isinf(r.c) and r.alpha == 0.0
    beta = 1e-6
    assert compare_right_leg_angle(0.8, beta).b == pytest.approx(math.tan(beta) * math.sinh(0.8), rel=1e-9)


def test_compare_right_opposite():
    r = compare_right_opposite(0.5, math.pi / 6)
    assert r.a == pytest.approx(CR3_A, abs=1e-14)
    assert compare_right_opposite(1.0, math.pi / 2 - 1e-9).a < 1e-8
    for a in (0.3, 1.0, 2.5):
        for beta in (0.1, 0.3, 0.6):
            if beta >= beta_inf(a):
                continue
            fwd = compare_right_leg_angle(a, beta)
            back = compare_right_opposite(fwd.b, beta)
            assert back.a == pytest.approx(a, abs=1e-10)


def test_compare_right_hypotenuse():
    r = compare_right_hypotenuse(math.pi / 4, c=1.0)
    assert r.b == pytest.approx(HYP_B, abs=1e-14)
    back = compare_right_hypotenuse(math.pi / 4, b=r.b)
    assert back.c == pytest.approx(1.0, abs=1e-10)
    assert back.a == pytest.approx(r.a, abs=1e-10)
    with pytest.raises(HypDomainError):
        compare_right_hypotenuse(math.pi / 2, c=1.0)
    with pytest.raises(HypDomainError):
        compare_right_hypotenuse(0.5, c=1.0, b=0.3)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 1.5))
def test_compare_right_identities(x, beta):
    outs = [compare_right_legs(x, 0.7 * x + 0.1), compare_right_opposite(x, beta),
            compare_right_hypotenuse(beta, c=x), compare_right_hypotenuse(beta, b=x)]
    if beta < beta_inf(x):
        outs.append(compare_right_leg_angle(x, beta))
    for r in outs:
        ref = solve_right_triangle(a=r.a, b=r.b)
        for key in ("c", "alpha", "beta"):
            assert getattr(r, key) == pytest.approx(getattr(ref, key), rel=1e-10, abs=1e-10)


def test_open_triangle_bound():
    assert open_triangle_angle_bound(math.asinh(1.0)) == pytest.approx(math.pi / 4, abs=1e-15)
    assert open_triangle_angle_bound(2.0) == pytest.approx(BETA_INF_2, abs=1e-15)
    a = 1.3
    ts = a + np.linspace(0.0, 8.0, 100)
    vals = [open_triangle_finite_bound(a, t) for t in ts]
    assert all(u < v for u, v in zip(vals, vals[1:]))
    assert vals[-1] < open_triangle_angle_bound(a)
    assert open_triangle_angle_bound(a) - vals[-1] < 1e-6


def test_flip_flop_rejects_intersecting_rays():
    with pytest.raises(FlipFlopConfigError):
        run_flip_flop(OpenTriangleConfig(0.5, 1.0, 1.0))
    with pytest.raises(HypDomainError):
        run_flip_flop(OpenTriangleConfig(1.0, 1.6, 1.0))


def test_flip_flop_symmetric_converges():
    run = run_flip_flop(OpenTriangleConfig(2.0, 1.3, 1.3))
    assert run.relation is RayRelation.ULTRAPARALLEL
    assert run.converged and run.final_error < 1e-6
    feet = [s.on_ray for s in run.states]
    assert feet[:4] == ["b", "c", "b", "c"]


def test_flip_flop_state_invariants_on_suite():
    for cfg in flip_flop_suite():
        run = run_flip_flop(cfg, max_steps=2000)
        st_ = run.states
        for u, v in zip(st_, st_[1:]):
            assert v.s <= u.s + 1e-12
            assert v.on_ray != u.on_ray
        assert all(0.0 < s.phi <= math.pi / 2 + 1e-12 for s in st_)
        for phi, ratio_bound, crit in flip_flop_bounds(run):
            assert phi >= ratio_bound - 1e-9
            assert phi >= crit - 1e-9


def test_flip_flop_sine_ratio_is_tight_in_the_plane():
    run = run_flip_flop(ultraparallel_config(1.2, 0.9, 0.3))
    for phi, ratio_bound, _ in flip_flop_bounds(run)[:20]:
        assert math.sin(phi) == pytest.approx(math.sin(ratio_bound), abs=1e-12)


def test_flip_flop_asymptotic_rays_decay_slowly():
    cfg = asymptotic_config(1.0, 1.0)
    run = run_flip_flop(cfg, max_steps=4000)
    assert run.relation is RayRelation.ASYMPTOTIC
    s = np.array([x.s for x in run.states])
    # perpendiculars shrink to zero, roughly like k**-0.5
    assert s[-1] < s[0]
    ratio = s[999] / s[3999]
    assert ratio == pytest.approx(2.0, rel=0.05)
    assert not run.converged
