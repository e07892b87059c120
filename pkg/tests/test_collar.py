import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collarkit.collar import (
    EqualityCase,
    cactus_loop_bound,
    collar_distance_bound,
    collar_width_bound,
    corollary_b_gap,
    corollary_b_gap_array,
    intersection_bound,
    lemma8_gap,
    trigineq_constant,
    width_arccosh_coth,
    width_arcsinh_cosech,
)
from collarkit.hypcore import HypDomainError, angle_from_sides, law_of_cosines

# mpmath references
ASINH1 = 0.88137358701954302523260932498
WIDTH_L2 = 0.771936832905304725070639140035
LEMMA8_11 = 0.271540317407621889238952810379
C3_2_4 = 0.381097845541815729781106738887


def test_collar_width_examples():
    r = collar_width_bound(2 * ASINH1)
    assert r.width == pytest.approx(ASINH1, abs=1e-14)
    assert collar_width_bound(2.0).width == pytest.approx(WIDTH_L2, abs=1e-14)
    assert collar_width_bound(1.0, k=2.0).width == pytest.approx(0.5 * WIDTH_L2, abs=1e-14)


def test_collar_width_forms_agree_on_log_grid():
    for x in np.geomspace(1e-3, 20.0, 400):
        assert abs(width_arccosh_coth(x) - width_arcsinh_cosech(x)) < 1e-12
        assert collar_width_bound(2 * x).forms_agree


def test_collar_width_decreasing_and_scaling():
    ls = np.geomspace(0.01, 30.0, 300)
    ws = [collar_width_bound(L).width for L in ls]
    assert all(u > v for u, v in zip(ws, ws[1:]))
    rng = np.random.default_rng(3)
    for _ in range(200):
        L, k = rng.uniform(0.01, 10), rng.uniform(0.1, 5)
        assert k * collar_width_bound(L, k).width == pytest.approx(collar_width_bound(k * L).width, rel=1e-12)


def test_collar_width_rejects_nonpositive():
    with pytest.raises(HypDomainError):
        collar_width_bound(0.0)
    with pytest.raises(HypDomainError):
        collar_width_bound(1.0, k=0.0)


def test_collar_distance_bound():
    assert collar_distance_bound(1.3, 1.3) == pytest.approx(2 * collar_width_bound(1.3).width)
    assert collar_distance_bound(2.0, 2 * ASINH1) == pytest.approx(WIDTH_L2 + ASINH1, abs=1e-13)
    rng = np.random.default_rng(4)
    for _ in range(100):
        l1, l2, k = rng.uniform(0.1, 6), rng.uniform(0.1, 6), rng.uniform(0.2, 4)
        assert abs(collar_distance_bound(l1, l2, k) - collar_distance_bound(k * l1, k * l2) / k) < 1e-12


def test_intersection_thresholds():
    L = 2 * ASINH1
    res, ok = intersection_bound(L, L, variant="c")
    assert abs(res) < 1e-14 and ok
    k = 1.7
    L4 = 8.0 / (3.0 * k) * ASINH1
    res, _ = intersection_bound(L4, L4, k, variant="c4")
    assert abs(res) < 1e-14
    res, ok = intersection_bound(2.0, 4.0, variant="c3")
    assert res == pytest.approx(C3_2_4, abs=1e-14) and ok
    res, ok = intersection_bound(0.5, 0.5, variant="c2")
    assert not ok
    with pytest.raises(ValueError):
        intersection_bound(1.0, 1.0, variant="c5")


def test_collar_threshold_consistency():
    for L in np.geomspace(0.05, 10.0, 50):
        w = collar_width_bound(L).width
        assert abs(math.sinh(w) * math.sinh(0.5 * L) - 1.0) < 1e-12
        res, _ = intersection_bound(L, 2 * w)
        assert abs(res) < 1e-12


def test_lemma8_examples():
    assert lemma8_gap(1.0, 2.0, 0.0, 0.0) == 0.0
    assert lemma8_gap(1.0, 1.0, 0.5, 0.5) == pytest.approx(LEMMA8_11, abs=1e-14)
    with pytest.raises(HypDomainError):
        lemma8_gap(1.0, 1.0, 1.5, 0.2)


def test_lemma8_random_nonnegative_and_strict():
    rng = np.random.default_rng(5)
    n = 1_000_000
    x = rng.uniform(0.0, 5.0, n)
    y = rng.uniform(0.0, 5.0, n)
    delta = x * rng.uniform(-1.0, 1.0, n)
    t = y * rng.uniform(0.0, 1.0, n)
    gap = lemma8_gap(x, y, delta, t)
    assert np.all(gap >= 0.0)
    strict = (np.abs(delta) > 1e-3) & (t > 1e-3)
    assert np.all(gap[strict] > 0.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 4.0), st.floats(0.01, 4.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.booleans())
def test_lemma8_strict(x, y, fd, ft, neg):
    delta = (-1 if neg else 1) * fd * x
    assert lemma8_gap(x, y, delta, ft * y) > 0.0


def test_corollary_b_examples():
    gap, case = corollary_b_gap(0.0, 0.0, 0.7, 1.9)
    assert gap == 0.0 and case is EqualityCase.U_ZERO
    gap, case = corollary_b_gap(1.0, 1.0, 2.0, 2.0)
    assert abs(gap) < 1e-12 and case is EqualityCase.MATCHED
    gap, case = corollary_b_gap(0.4, 2.0, 0.0, 0.0)
    assert gap == 0.0 and case is EqualityCase.V_ZERO
    gap, case = corollary_b_gap(1.0, 2.0, 1.0, 1.0)
    assert gap > 0.0 and case is EqualityCase.NONE


def test_corollary_b_random_and_near_equality():
    rng = np.random.default_rng(6)
    n = 200_000
    u1, u2, v1, v2 = (rng.uniform(0.0, 4.0, n) for _ in range(4))
    gap, eq = corollary_b_gap_array(u1, u2, v1, v2)
    assert not eq.any()
    assert np.all(gap > 1e-15)
    # adversarial: matched pairs perturbed by a relative 1e-6
    u = rng.uniform(0.1, 3.0, n)
    v = rng.uniform(0.1, 3.0, n)
    gap, eq = corollary_b_gap_array(u, u * (1 + 1e-6), v, v)
    assert not eq.any() and np.all(gap > 1e-15)
    gap, eq = corollary_b_gap_array(u, u, v, v)
    assert eq.all() and np.all(np.abs(gap) < 1e-12)


def test_trigineq_constant_formula():
    a0, b0, c0 = 2.0, 0.5, 1.0
    tb = trigineq_constant(a0, b0, c0)
    expected = (math.cosh(a0) * (math.cosh(b0) - 1) / b0**2 + math.sinh(a0) * math.sinh(b0) / b0) / math.sinh(c0 / 2)
    assert tb.C == pytest.approx(expected, rel=1e-14)


def test_trigineq_random_triangles():
    a0, b0, c0 = 3.0, 1.0, 0.5
    tb = trigineq_constant(a0, b0, c0)
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100_000:
        m = 200_000
        a = rng.uniform(0.0, a0, m)
        b = rng.uniform(1e-4, b0, m)
        gamma = rng.uniform(0.01, math.pi - 0.01, m)
        # vectorized law of cosines, stable half-angle form
        h = np.sinh(0.5 * (a - b))
        y = 2 * h * h + np.sinh(a) * np.sinh(b) * 2 * np.sin(0.5 * gamma) ** 2
        c = np.log1p(y + np.sqrt(y * (2 + y)))
        keep = c >= c0
        a, b, c, gamma = a[keep], b[keep], c[keep], gamma[keep]
        zeta = np.maximum(gamma - math.pi / 2, 0.0)
        rhs = tb.C * (b * np.sin(zeta) + b * b)
        assert np.all(c - a <= rhs + 1e-12)
        checked += keep.sum()


def test_trigineq_right_angle_series():
    tb = trigineq_constant(2.0, 1.0, 1.0)
    a = 1.5
    for b in np.geomspace(1e-4, 0.5, 30):
        c = law_of_cosines(a, b, math.pi / 2)
        assert c - a <= tb.bound(b, 0.0) + 1e-15
        # c - a is second order in b
        assert (c - a) / b**2 < tb.C
    assert tb.bound(1e-9, 0.0) < 1e-16


def test_trigineq_angle_consistency():
    # the triangle assembled from its sides reproduces the angle used to build it
    c = law_of_cosines(1.2, 0.3, 1.8)
    assert angle_from_sides(1.2, 0.3, c) == pytest.approx(1.8, abs=1e-12)


def test_cactus_loop_bound():
    assert cactus_loop_bound() == pytest.approx(2 * ASINH1, abs=1e-14)
    assert cactus_loop_bound(2.0) == pytest.approx(ASINH1, abs=1e-14)
    assert cactus_loop_bound() == pytest.approx(2 * collar_width_bound(2 * ASINH1).width, abs=1e-14)
