"""Attenuation of a Fermi metric to an exactly flat one near the boundary geodesic.

G~ = 1 + phi(r) g with g = G - 1 and
phi(x) = chi(x/v) x^delta + chi(x/w) (1 - x^delta), v = delta^(1/delta).
For small delta, v underflows long before x^delta does, so every product
involving phi', phi'' is formed from the scaled factors x phi' and
x^2 phi'' together with g / x^2 and g' / x from the collar jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..hypcore import HypDomainError
from .metric import FermiMetric, MetricJet, gauss_curvature

CHI_A = 40.0 / math.sqrt(3.0)  # common bound for chi' (max 3.75) and |chi''| (max 40/sqrt 3)


def chi(x):
    """Quintic smoothstep rising from 0 at x = 1/4 to 1 at x = 3/4, with chi' and chi''."""
    s = np.clip(2.0 * np.asarray(x, dtype=float) - 0.5, 0.0, 1.0)
    c = s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    c1 = 60.0 * s * s * (1.0 - s) ** 2
    c2 = 240.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    return c, c1, c2


@dataclass(frozen=True)
class SmoothingParams:
    delta: float
    w: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise HypDomainError("delta must lie in (0, 1)")
        if not 0.0 < self.w < 0.25:
            raise HypDomainError("w must lie in (0, 1/4)")
        if not self.v < self.w:
            raise HypDomainError("need v = delta^(1/delta) < w")

    @property
    def v(self) -> float:
        return self.delta ** (1.0 / self.delta)

    def phi(self, x):
        """phi, x phi' and x^2 phi'' at x >= 0."""
        x = np.asarray(x, dtype=float)
        d = self.delta
        t = x / self.v
        u = x / self.w
        ct, ct1, ct2 = chi(t)
        cu, cu1, cu2 = chi(u)
        xd = np.power(x, d)
        om = -np.expm1(d * np.log(np.where(x > 0, x, 1.0)))  # 1 - x^delta, accurate for small delta
        om = np.where(x > 0, om, 1.0)
        # written so that phi is exactly 1 once both steps are complete
        p = np.where(ct < 1.0, ct * xd + cu * om, 1.0 - (1.0 - cu) * om)
        xp = ct1 * t * xd + ct * d * xd + cu1 * u * om - cu * d * xd
        x2pp = (ct2 * t * t * xd + 2.0 * ct1 * t * d * xd + ct * d * (d - 1.0) * xd
                + cu2 * u * u * om - 2.0 * cu1 * u * d * xd - cu * d * (d - 1.0) * xd)
        return p, xp, x2pp


@dataclass(frozen=True)
class SmoothedMetric:
    """The attenuated metric; agrees with ``base`` for r >= 3w/4."""

    base: FermiMetric
    params: SmoothingParams

    @property
    def boundary_length(self) -> float:
        return self.base.boundary_length

    @property
    def r_max(self) -> float:
        return self.base.r_max

    @property
    def name(self) -> str:
        return f"{self.base.name}-smoothed"

    def jet(self, r, t) -> MetricJet:
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        r, t = np.broadcast_arrays(r, t)
        out = self.base.jet(r, t)
        inner = r < 0.75 * self.params.w
        if not inner.any():
            return out
        ri, ti = r[inner], t[inner]
        cj = self.base.collar_jet(ri, ti)
        p, xp, x2pp = self.params.phi(ri)
        g = cj.g(ri)
        G = 1.0 + p * g
        G_r = (xp * cj.g_over_r2 + p * cj.gr_over_r) * ri
        G_rr = x2pp * cj.g_over_r2 + 2.0 * xp * cj.gr_over_r + p * cj.g_rr
        G_t = p * cj.g_t
        fields = {}
        for name, val in (("G", G), ("G_r", G_r), ("G_rr", G_rr), ("G_t", G_t)):
            arr = np.array(getattr(out, name), dtype=float, copy=True)
            arr[inner] = val
            fields[name] = arr
        return MetricJet(out.A, out.A_r, out.A_t, out.A_tt, **fields)

    def A(self, r, t):
        return self.jet(r, t).A

    def G(self, r, t):
        return self.jet(r, t).G


@dataclass(frozen=True)
class SmoothingReport:
    delta: float
    w: float
    v: float
    a: float
    b: float
    kappa: float
    ratio_max: float  # max G / G~
    ratio_bound: float  # 1 + delta b / 2
    dphi_max: float  # max |phi' g'|
    ddphi_max: float  # max |phi'' g|
    term_bound: float  # delta kappa
    inf_k: float  # inf K over the collar grid
    inf_k_smoothed: float  # inf K~ over the same grid
    flat_max: float  # max |G~ - 1| for r <= v/4

    @property
    def holds(self) -> bool:
        return (_below(self.ratio_max, self.ratio_bound) and _below(self.dphi_max, self.term_bound)
                and _below(self.ddphi_max, self.term_bound) and self.flat_max == 0.0)


def _below(x: float, bound: float) -> bool:
    # strict, except that a vanishing quantity meets a vanishing bound (flat input)
    return x < bound or (x == 0.0 and bound == 0.0) or (bound == 1.0 and x == 1.0)


def collar_grid(sp: SmoothingParams, n_log: int = 1200, n_lin: int = 400) -> np.ndarray:
    """Radii covering [v/8, w]: log-spaced through the tiny inner transition, linear outside."""
    lo = math.log10(sp.v / 8.0)
    logs = np.logspace(lo, math.log10(sp.w), n_log)
    return np.unique(np.concatenate([[0.0], logs, np.linspace(0.0, sp.w, n_lin)]))


def smoothing_transform(m: FermiMetric, sp: SmoothingParams, n_theta: int = 64):
    """Attenuate ``m`` near r = 0; returns the smoothed metric and a report of the proof's bounds."""
    if sp.w > m.collar_width():
        raise HypDomainError(f"w = {sp.w} exceeds the bump-free collar {m.collar_width():.4g}")
    if sp.w > m.r_max:
        raise HypDomainError("w exceeds r_max")
    rs = collar_grid(sp)
    ts = np.linspace(0.0, m.boundary_length, n_theta, endpoint=False)
    R, T = np.meshgrid(rs, ts, indexing="ij")
    cj = m.collar_jet(R, T)
    g = cj.g(R)
    if np.abs(g).max() >= 0.5:
        raise HypDomainError("|g| < 1/2 fails on [0, w]")
    b = float(np.abs(cj.g_rr).max())
    a = CHI_A
    kappa = b * (1.0 + 2.0 * a + a / (math.e * sp.w))
    p, xp, x2pp = sp.phi(R)
    Gt = 1.0 + p * g
    ratio = (1.0 + g) / Gt
    dphi = np.abs(xp * cj.gr_over_r)
    ddphi = np.abs(x2pp * cj.g_over_r2)
    mt = SmoothedMetric(m, sp)
    K = gauss_curvature(m, R, T)
    Kt = gauss_curvature(mt, R, T)
    flat = R <= 0.25 * sp.v
    report = SmoothingReport(
        delta=sp.delta, w=sp.w, v=sp.v, a=a, b=b, kappa=kappa,
        ratio_max=float(ratio.max()), ratio_bound=1.0 + 0.5 * sp.delta * b,
        dphi_max=float(dphi.max()), ddphi_max=float(ddphi.max()), term_bound=sp.delta * kappa,
        inf_k=float(K.min()), inf_k_smoothed=float(Kt.min()),
        flat_max=float(np.abs(Gt[flat] - 1.0).max()) if flat.any() else 0.0,
    )
    return mt, report
