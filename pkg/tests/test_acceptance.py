"""The fourteen acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one PASS/FAIL line (collected again in the terminal
summary) and then asserts the thresholds restated here explicitly.
"""

import math

import pytest

from collarkit import verify
from conftest import ACCEPTANCE

SEED = 0


def run(number: int):
    c = verify.CRITERIA[number - 1]
    assert c.number == number
    res = verify.run_criterion(c, SEED)
    status = verify.aggregate(res)
    runtime = res[0].runtime
    worst = "; ".join(f"{r.name} {r.status} value={r.value:.6g} bound={r.bound:.6g}"
                      for r in res if r.status != "pass") or f"{len(res)} checks"
    line = f"criterion {number:2d} {c.name}: {status.upper()} ({runtime:.1f}s, budget {c.budget:g}s) {worst}"
    ACCEPTANCE[number] = line
    print(line)
    return {r.name: r for r in res}, runtime


def test_criterion_01_collar_identity():
    res, t = run(1)
    assert res["collar-identity"].value < 1e-12
    assert t < 1.0


def test_criterion_02_lemma8():
    res, t = run(2)
    assert res["lemma8.nonnegative"].value >= -1e-12
    assert res["lemma8.strict"].value > 1e-15
    assert t < 10.0


def test_criterion_03_corollary_b():
    res, t = run(3)
    eq, strict = res["corollary-b.equality"], res["corollary-b.strict"]
    assert eq.value <= 1e-12 and eq.status == "pass"
    assert strict.value > 0.0 and "misclassified=0" in strict.note
    assert t < 5.0


def test_criterion_04_toponogov():
    res, t = run(4)
    assert res["toponogov.funnel"].value < 1e-3
    gentle = [r for n, r in res.items() if n != "toponogov.funnel"]
    assert len(gentle) == 3
    for r in res.values():
        assert r.note == "unconnected=0"
    assert all(r.value <= 1e-3 for r in gentle)
    assert t < 120.0


def test_criterion_05_right_comparison():
    res, t = run(5)
    assert res["right-comparison.round-trip"].value <= 1e-10
    assert res["right-comparison.threshold"].value <= 1e-9
    assert t < 5.0


def test_criterion_06_flip_flop():
    res, t = run(6)
    assert res["flip-flop.monotone"].value <= 0.0
    assert res["flip-flop.bounds"].value <= 1e-9
    assert t < 30.0
    # every configuration of the suite must reach |phi - pi/2| < 1e-6
    assert res["flip-flop.converged"].value < 1e-6, res["flip-flop.converged"].note


def test_criterion_07_open_triangle_limit():
    res, t = run(7)
    assert res["open-triangle-limit.approach"].value <= 1e-6
    assert res["open-triangle-limit.monotone"].value <= 0.0
    assert res["open-triangle-limit.pi4"].value <= 1e-15
    assert t < 1.0


def test_criterion_08_smoothing():
    res, t = run(8)
    for name in ("bump", "gentle-modulated"):
        assert res[f"smoothing.{name}.bounds"].value < 1.0
        assert res[f"smoothing.{name}.bounds"].status == "pass"
        assert res[f"smoothing.{name}.curvature"].value >= 0.0
        assert res[f"smoothing.{name}.monotone"].status == "pass"
    assert t < 30.0


def test_criterion_09_trigineq():
    res, t = run(9)
    assert res["trigineq"].value <= 1e-12
    assert t < 10.0


def test_criterion_10_collar_width():
    res, t = run(10)
    assert len(res) == 12
    for r in res.values():
        # bound already carries the -3 hR allowance
        assert r.value >= r.bound, r.name
        assert r.tolerance == pytest.approx(3 * 4.0 / 511)
    assert t < 300.0


def test_criterion_11_cactus_loop():
    res, t = run(11)
    assert len(res) == 3
    for r in res.values():
        k = float(r.note.split()[0].split("=")[1])
        assert r.bound == pytest.approx(2 * math.asinh(1.0) / k * 0.92, rel=1e-6)
        assert r.value >= r.bound, r.name
    assert t < 120.0


def test_criterion_12_thin_cylinder():
    res, t = run(12)
    assert len(res) == 2
    for r in res.values():
        assert r.value < r.bound  # lambda-thin below 2 arcsinh(1)/k
        assert r.status == "pass" and "failures=0" in r.note
    assert t < 120.0


def test_criterion_13_regularity():
    res, t = run(13)
    assert res["regularity.lipschitz-512"].value <= 1.3
    assert res["regularity.lipschitz-1024"].value <= 1.25
    assert res["regularity.tangent"].value < 0.05
    assert t < 180.0


def test_criterion_14_open_quadrilateral():
    res, t = run(14)
    assert len(res) == 6
    for r in res.values():
        assert r.status == "pass", r.name
        assert r.value >= 0.95
    assert t < 120.0
