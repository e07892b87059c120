"""Closed-form collar widths, intersection conditions and the sinh-product inequality kernel.

Everything here is scalar.  Lengths are measured in the metric with
curvature bound ``K >= -k**2``; bounds scale like ``1/k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .hypcore import HypDomainError

EQUALITY_TOL = 1e-12


class CollarVariant(str, Enum):
    FULL = "full-collar"
    HALF = "half-collar"
    FUNNEL = "funnel-d0"


def _check_scale(k: float) -> None:
    if not k > 0.0:
        raise HypDomainError(f"curvature scale k={k} must be positive")


def width_arccosh_coth(x: float) -> float:
    """arccosh(coth x); loses accuracy for large x, kept as a cross-check."""
    # coth x - 1 = 2 / (exp(2x) - 1)
    y = 2.0 / math.expm1(2.0 * x)
    return math.log1p(y + math.sqrt(y * (2.0 + y)))


def width_arcsinh_cosech(x: float) -> float:
    return math.asinh(1.0 / math.sinh(x))


@dataclass(frozen=True)
class CollarBoundReport:
    geodesic_length: float
    k: float
    width: float
    variant: CollarVariant
    width_acosh_form: float
    width_asinh_form: float

    @property
    def forms_agree(self) -> bool:
        return abs(self.width_acosh_form - self.width_asinh_form) < 1e-12


def collar_width_bound(length: float, k: float = 1.0, variant=CollarVariant.FULL) -> CollarBoundReport:
    """Lower bound (1/k) arcsinh(cosech(k L / 2)) on the collar width about a geodesic of length L.

    The same number bounds the full collar, the half-collar of a
    homotopically trivial geodesic, and the funnel radius d0.
    """
    if not length > 0.0:
        raise HypDomainError(f"geodesic length {length} must be positive")
    _check_scale(k)
    x = 0.5 * k * length
    w1 = width_arccosh_coth(x) / k
    w2 = width_arcsinh_cosech(x) / k
    return CollarBoundReport(length, k, w2, CollarVariant(variant), w1, w2)


def collar_distance_bound(l_gamma: float, l_mu: float, k: float = 1.0) -> float:
    """Lower bound on dist(gamma, mu) for disjoint, non-homotopic simple closed geodesics."""
    return collar_width_bound(l_gamma, k).width + collar_width_bound(l_mu, k).width


def intersection_bound(l_gamma: float, l_eta: float, k: float = 1.0, variant: str = "c") -> tuple[float, bool]:
    """Residual (lhs - 1) of the sinh-product condition forced on intersecting geodesics.

    ``satisfied`` is False exactly when a configuration with these lengths
    cannot occur on a surface of the corresponding type.
    """
    if not (l_gamma > 0.0 and l_eta > 0.0):
        raise HypDomainError("geodesic lengths must be positive")
    _check_scale(k)
    s = math.sinh
    if variant == "c":
        lhs = s(0.5 * k * l_gamma) * s(0.5 * k * l_eta)
    elif variant == "c2":
        lhs = s(0.5 * k * l_gamma) * s(0.25 * k * l_eta)
    elif variant == "c3":
        lhs = min(s(0.5 * k * l_gamma) * s(0.25 * k * l_eta), s(0.25 * k * l_gamma) * s(0.5 * k * l_eta))
    elif variant == "c4":
        lhs = s(0.375 * k * l_gamma) * s(0.375 * k * l_eta)
    else:
        raise ValueError(f"unknown intersection variant {variant!r}")
    residual = lhs - 1.0
    return residual, residual >= 0.0


def lemma8_gap(x, y, delta, t):
    """sinh x sinh y - min(sinh(x+delta) sinh(y-t), sinh(x-delta) sinh(y+t)); never negative.

    Accepts scalars or equally shaped arrays.
    """
    x, y, delta, t = (np.asarray(v, dtype=float) for v in (x, y, delta, t))
    if not np.all((np.abs(delta) <= x) & (t >= 0.0) & (t <= y)):
        raise HypDomainError("need 0 <= |delta| <= x and 0 <= t <= y")
    base = np.sinh(x) * np.sinh(y)
    gap = base - np.minimum(np.sinh(x + delta) * np.sinh(y - t), np.sinh(x - delta) * np.sinh(y + t))
    return float(gap) if gap.ndim == 0 else gap


class EqualityCase(str, Enum):
    U_ZERO = "u-zero"
    V_ZERO = "v-zero"
    MATCHED = "matched"
    NONE = "none"


def corollary_b_gap(u1: float, u2: float, v1: float, v2: float) -> tuple[float, EqualityCase]:
    """Gap in sinh((u1+u2)/2) sinh((v1+v2)/2) >= min(sinh u1 sinh v1, sinh u2 sinh v2).

    The three equality cases are recognized exactly from the arguments;
    everywhere else the gap is strictly positive.
    """
    if min(u1, u2, v1, v2) < 0.0:
        raise HypDomainError("the sinh-product inequality needs nonnegative arguments")
    if u1 == 0.0 and u2 == 0.0:
        case = EqualityCase.U_ZERO
    elif v1 == 0.0 and v2 == 0.0:
        case = EqualityCase.V_ZERO
    elif u1 == u2 and v1 == v2:
        case = EqualityCase.MATCHED
    else:
        case = EqualityCase.NONE
    return float(_corollary_b_raw(u1, u2, v1, v2)), case


def _corollary_b_raw(u1, u2, v1, v2):
    lhs = np.sinh(0.5 * (u1 + u2)) * np.sinh(0.5 * (v1 + v2))
    return lhs - np.minimum(np.sinh(u1) * np.sinh(v1), np.sinh(u2) * np.sinh(v2))


def corollary_b_gap_array(u1, u2, v1, v2):
    """Vectorized gap plus a boolean mask of the three equality cases."""
    u1, u2, v1, v2 = (np.asarray(v, dtype=float) for v in (u1, u2, v1, v2))
    if np.any(np.minimum(np.minimum(u1, u2), np.minimum(v1, v2)) < 0.0):
        raise HypDomainError("the sinh-product inequality needs nonnegative arguments")
    equal = ((u1 == 0.0) & (u2 == 0.0)) | ((v1 == 0.0) & (v2 == 0.0)) | ((u1 == u2) & (v1 == v2))
    return _corollary_b_raw(u1, u2, v1, v2), equal


@dataclass(frozen=True)
class TrigineqBound:
    a0: float
    b0: float
    c0: float
    k: float
    C: float

    def bound(self, b: float, zeta: float) -> float:
        """Right-hand side C (b sin(zeta) + b^2) for a triangle with side b and angle slack zeta."""
        return self.C * (b * math.sin(zeta) + b * b)


def _cosh_m1_over_sq(t: float) -> float:
    # (cosh t - 1) / t^2 = 2 sinh^2(t/2) / t^2
    if t == 0.0:
        return 0.5
    h = math.sinh(0.5 * t) / t
    return 2.0 * h * h


def trigineq_constant(a0: float, b0: float, c0: float) -> TrigineqBound:
    """Constant C with c - a <= C (b sin(zeta) + b^2) for hyperbolic triangles (k = 1).

    Valid whenever a <= a0, b <= b0, c >= c0 and the angle opposite c is at
    most pi/2 + zeta.  C is assembled from the three monotone estimates
    (cosh t - 1)/t^2 increasing, sinh(t)/t increasing, and
    (cosh c - cosh a)/(c - a) >= sinh(c0/2).
    """
    if not (a0 > 0.0 and b0 > 0.0 and c0 > 0.0):
        raise HypDomainError("a0, b0, c0 must be positive")
    top = math.cosh(a0) * _cosh_m1_over_sq(b0) + math.sinh(a0) * math.sinh(b0) / b0
    return TrigineqBound(a0, b0, c0, 1.0, top / math.sinh(0.5 * c0))


def cactus_loop_bound(k: float = 1.0) -> float:
    """Minimal length 2 arcsinh(1)/k of a loop homotopic to the boundary through a cactus-arm point."""
    _check_scale(k)
    return 2.0 * math.asinh(1.0) / k
