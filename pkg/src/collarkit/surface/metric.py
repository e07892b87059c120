"""Metrics ds^2 = A(r,t)^2 dr^2 + G(r,t)^2 dt^2 on the half-cylinder [0, rMax] x R/L.

The boundary r = 0 is a closed geodesic of length L.  Near it A = 1 and
G = 1 + O(r^2), so (r, t) are Fermi coordinates there.  Away from the
boundary compact bumps may stretch A (radial direction) and G (angular
direction); with A != 1 the coordinate r is no longer the distance to the
boundary, which is what lets distance fields bend around bumps and form
cactus arms.

Every quantity has closed-form partial derivatives; nothing here is
differentiated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..hypcore import HypDomainError

R_MAX_DEFAULT = 12.0
K_FLOOR = 1e-6


def profile(u):
    """Compact bump (1 - u^2)^4 on |u| < 1 and its first two derivatives."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 0.0)
    w2 = w * w
    p = w2 * w2
    dp = -8.0 * u * w2 * w
    ddp = w2 * (56.0 * u * u - 8.0)
    return p, np.where(inside, dp, 0.0), np.where(inside, ddp, 0.0)


@dataclass(frozen=True)
class Bump:
    """Product bump P((r - r0)/sr) P((t - t0)/st); ``st=None`` makes it a ring (independent of t).

    ``amp_a`` scales the radial stretch A, ``amp_g`` the angular factor of G.
    Equal amplitudes give a conformal bump, which bulges the surface outward.
    """

    r0: float
    sr: float
    t0: float = 0.0
    st: float | None = None
    amp_a: float = 0.0
    amp_g: float = 0.0

    def values(self, r, t, period):
        pr, dpr, ddpr = profile((r - self.r0) / self.sr)
        if self.st is None:
            one = np.ones_like(pr)
            zero = np.zeros_like(pr)
            pt, dpt, ddpt = one, zero, zero
        else:
            d = np.mod(t - self.t0 + 0.5 * period, period) - 0.5 * period
            pt, dpt, ddpt = profile(d / self.st)
            dpt = dpt / self.st
            ddpt = ddpt / (self.st * self.st)
        b = pr * pt
        b_r = dpr / self.sr * pt
        b_rr = ddpr / (self.sr * self.sr) * pt
        b_t = pr * dpt
        b_tt = pr * ddpt
        return b, b_r, b_rr, b_t, b_tt


@dataclass(frozen=True)
class MetricJet:
    A: np.ndarray
    A_r: np.ndarray
    A_t: np.ndarray
    A_tt: np.ndarray
    G: np.ndarray
    G_r: np.ndarray
    G_rr: np.ndarray
    G_t: np.ndarray


@dataclass(frozen=True)
class CollarJet:
    """g = G - 1 near the boundary in scaled form, finite even for tiny r."""

    g_over_r2: np.ndarray
    gr_over_r: np.ndarray
    g_rr: np.ndarray
    g_t: np.ndarray

    def g(self, r):
        return self.g_over_r2 * r * r

    def g_r(self, r):
        return self.gr_over_r * r


@dataclass(frozen=True)
class FermiMetric:
    """Half-cylinder metric built from a funnel base and compact bumps.

    The base is G0 = 1 + (cosh(k r) - 1)(1 + m cos(2 pi n t / L + phase)),
    which has curvature -k^2 for m = 0; the bumps multiply G0 by
    1 + sum amp_g b and set A = 1 + sum amp_a b.
    """

    boundary_length: float
    r_max: float = R_MAX_DEFAULT
    k: float = 1.0
    modulation: float = 0.0
    mode: int = 1
    phase: float = 0.0
    bumps: tuple = ()
    name: str = "custom"

    def __post_init__(self):
        L = self.boundary_length
        if not (L > 0 and self.r_max > 0 and self.k >= 0):
            raise HypDomainError("need boundary_length > 0, r_max > 0, k >= 0")
        if not 0.0 <= self.modulation < 1.0:
            raise HypDomainError("modulation must lie in [0, 1)")
        neg_a = sum(min(b.amp_a, 0.0) for b in self.bumps)
        neg_g = sum(min(b.amp_g, 0.0) for b in self.bumps)
        if neg_a <= -1.0 or neg_g <= -1.0:
            raise HypDomainError("negative bump amplitudes must sum to more than -1 to keep A, G > 0")
        for b in self.bumps:
            if b.r0 - b.sr < 0.0:
                raise HypDomainError(f"bump at r0={b.r0} with width {b.sr} reaches the boundary")
            if b.st is not None and not 0.0 < b.st <= 0.5 * L:
                raise HypDomainError("angular bump width must lie in (0, L/2]")

    # --- evaluation -------------------------------------------------------

    def _base(self, r, t):
        k, m = self.k, self.modulation
        om = 2.0 * math.pi * self.mode / self.boundary_length
        mod = 1.0 + m * np.cos(om * t + self.phase)
        mod_t = -m * om * np.sin(om * t + self.phase)
        if k == 0.0:
            z = np.zeros_like(r * mod)
            return 1.0 + z, z, z, z, mod, mod_t
        h = np.sinh(0.5 * k * r)
        cm1 = 2.0 * h * h  # cosh(kr) - 1
        g0 = 1.0 + cm1 * mod
        g0_r = k * np.sinh(k * r) * mod
        g0_rr = k * k * np.cosh(k * r) * mod
        g0_t = cm1 * mod_t
        return g0, g0_r, g0_rr, g0_t, mod, mod_t

    def jet(self, r, t) -> MetricJet:
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        r, t = np.broadcast_arrays(r, t)
        g0, g0_r, g0_rr, g0_t, _, _ = self._base(r, t)
        A = np.ones_like(r)
        A_r = np.zeros_like(r)
        A_t = np.zeros_like(r)
        A_tt = np.zeros_like(r)
        H = np.ones_like(r)
        H_r = np.zeros_like(r)
        H_rr = np.zeros_like(r)
        H_t = np.zeros_like(r)
        for bump in self.bumps:
            b, b_r, b_rr, b_t, b_tt = bump.values(r, t, self.boundary_length)
            if bump.amp_a:
                A = A + bump.amp_a * b
                A_r = A_r + bump.amp_a * b_r
                A_t = A_t + bump.amp_a * b_t
                A_tt = A_tt + bump.amp_a * b_tt
            if bump.amp_g:
                H = H + bump.amp_g * b
                H_r = H_r + bump.amp_g * b_r
                H_rr = H_rr + bump.amp_g * b_rr
                H_t = H_t + bump.amp_g * b_t
        G = g0 * H
        G_r = g0_r * H + g0 * H_r
        G_rr = g0_rr * H + 2.0 * g0_r * H_r + g0 * H_rr
        G_t = g0_t * H + g0 * H_t
        return MetricJet(A, A_r, A_t, A_tt, G, G_r, G_rr, G_t)

    def A(self, r, t):
        return self.jet(r, t).A

    def G(self, r, t):
        return self.jet(r, t).G

    def collar_jet(self, r, t) -> CollarJet:
        """Scaled jet of g = G - 1, valid where no bump reaches (A = 1 there)."""
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        r, t = np.broadcast_arrays(r, t)
        reach = self.collar_width()
        if np.any(r > reach):
            raise HypDomainError(f"collar jet requested at r > {reach}, where bumps are active")
        k = self.k
        _, _, _, _, mod, mod_t = self._base(r, t)
        if k == 0.0:
            z = np.zeros_like(r)
            return CollarJet(z, z, z, z)
        safe = np.where(r > 0.0, r, 1.0)
        half = np.where(r > 0.0, np.sinh(0.5 * k * r) / safe, 0.5 * k)
        full = np.where(r > 0.0, np.sinh(k * r) / safe, k)
        h = np.sinh(0.5 * k * r)
        return CollarJet(2.0 * half * half * mod, k * full * mod, k * k * np.cosh(k * r) * mod, 2.0 * h * h * mod_t)

    def collar_width(self) -> float:
        """Largest r such that [0, r] is free of bumps."""
        if not self.bumps:
            return self.r_max
        return min(b.r0 - b.sr for b in self.bumps)

    def is_fermi(self) -> bool:
        """True when A = 1 everywhere, so r is the distance to the boundary."""
        return all(b.amp_a == 0.0 for b in self.bumps)

    def is_rotational(self) -> bool:
        return self.modulation == 0.0 and all(b.st is None for b in self.bumps)

    def check_invariants(self, n: int = 4096) -> float:
        """Max violation of G(0,t) = 1, G_r(0,t) = 0, A(0,t) = 1 on a dense boundary sample."""
        t = np.linspace(0.0, self.boundary_length, n, endpoint=False)
        j = self.jet(np.zeros_like(t), t)
        return float(max(np.abs(j.G - 1).max(), np.abs(j.G_r).max(), np.abs(j.A - 1).max()))


def gauss_curvature(m: FermiMetric, r, t):
    """K = -(1/(A G)) [ (G_r / A)_r + (A_t / G)_t ]; reduces to -G_rr / G when A = 1."""
    j = m.jet(r, t)
    A, G = j.A, j.G
    inner = j.G_rr / A - j.G_r * j.A_r / (A * A) + j.A_tt / G - j.A_t * j.G_t / (G * G)
    return -inner / (A * G)


@dataclass(frozen=True)
class CurvatureBound:
    k: float
    inf_k: float
    argmin: tuple
    grid: tuple
    floored: bool


def curvature_lower_bound(m: FermiMetric, n_r: int = 2048, n_theta: int = 1024, refine: int = 6) -> CurvatureBound:
    """k = sqrt(max(eps^2, -inf K)) from a dense grid refined by local minimization."""
    rs = np.linspace(0.0, m.r_max, n_r)
    ts = np.linspace(0.0, m.boundary_length, n_theta, endpoint=False)
    best = math.inf
    arg = (0.0, 0.0)
    cand = []
    # row blocks keep memory modest on large grids
    for i0 in range(0, n_r, 256):
        R, T = np.meshgrid(rs[i0:i0 + 256], ts, indexing="ij")
        K = gauss_curvature(m, R, T)
        flat = np.argsort(K, axis=None)[:refine]
        for idx in flat:
            ii, jj = np.unravel_index(idx, K.shape)
            cand.append((float(K[ii, jj]), float(R[ii, jj]), float(T[ii, jj])))
    cand.sort()
    hr = rs[1] - rs[0]
    ht = ts[1] - ts[0]
    for kval, r0, t0 in cand[:refine]:
        if kval < best:
            best, arg = kval, (r0, t0)

        def f(x):
            return float(gauss_curvature(m, x[0], x[1]))

        lo = (max(0.0, r0 - 2 * hr), min(m.r_max, r0 + 2 * hr))
        res = optimize.minimize(f, [r0, t0], method="L-BFGS-B", bounds=[lo, (t0 - 2 * ht, t0 + 2 * ht)],
                                options={"ftol": 1e-15, "gtol": 1e-12})
        if res.fun < best:
            best, arg = float(res.fun), (float(res.x[0]), float(np.mod(res.x[1], m.boundary_length)))
    k = math.sqrt(max(K_FLOOR * K_FLOOR, -best))
    return CurvatureBound(k, best, arg, (n_r, n_theta), -best < K_FLOOR * K_FLOOR)


# --- families ---------------------------------------------------------------


def constant_curvature(k: float, boundary_length: float, r_max: float = R_MAX_DEFAULT) -> FermiMetric:
    return FermiMetric(boundary_length, r_max, k, name=f"constant-k{k:g}")


def flat_cylinder(boundary_length: float, r_max: float = R_MAX_DEFAULT) -> FermiMetric:
    return FermiMetric(boundary_length, r_max, 0.0, name="flat")


def bump_metric(k: float, boundary_length: float, bumps, r_max: float = R_MAX_DEFAULT, modulation: float = 0.0,
                mode: int = 1, name: str = "bump") -> FermiMetric:
    return FermiMetric(boundary_length, r_max, k, modulation, mode, 0.0, tuple(bumps), name)


def cactus_metric(boundary_length: float, arms, k: float = 0.5, r_max: float = 4.0, name: str = "cactus") -> FermiMetric:
    """Conformal bulges (r0, t0, radius, amplitude); tall ones carry a local maximum of distance."""
    bumps = [Bump(r0, rad, t0, rad, amp, amp) for r0, t0, rad, amp in arms]
    return FermiMetric(boundary_length, r_max, k, bumps=tuple(bumps), name=name)


def waisted_metric(boundary_length: float, depth: float, r0: float, width: float, r_max: float = 4.0) -> FermiMetric:
    """Flat cylinder whose circumference dips to (1 - depth) L around r = r0."""
    return FermiMetric(boundary_length, r_max, 0.0, bumps=(Bump(r0, width, amp_g=-depth),), name="waisted")


def presets() -> dict:
    """Named metrics used by the experiment suites and the command line."""
    L = 2.0
    return {
        "funnel": constant_curvature(1.0, L, r_max=4.0),
        "flat": flat_cylinder(L, r_max=4.0),
        "bump": bump_metric(0.6, L, [Bump(1.2, 0.5, 0.5 * L, 0.5, amp_a=0.3, amp_g=0.2)], r_max=4.0),
        "cactus": cactus_metric(3.0, [(1.3, 1.5, 0.6, 8.0)]),
        "thin": flat_cylinder(1.2, r_max=4.0),
        "waisted": waisted_metric(1.0, 0.2, 1.5, 1.0),
    }


def gentle_suite() -> dict:
    """Bump metrics whose curvature stays above -1."""
    ms = [
        bump_metric(0.6, 2.0, [Bump(1.5, 0.8, 1.0, 0.8, amp_a=0.05, amp_g=0.05)], r_max=4.0, name="gentle-conformal"),
        bump_metric(0.5, 2.0, [Bump(1.4, 0.9, 0.6, 0.9, amp_g=0.08)], r_max=4.0, name="gentle-angular"),
        bump_metric(0.5, 2.0, [Bump(1.2, 0.7, 0.5, 0.6, amp_a=0.06, amp_g=0.04),
                               Bump(2.2, 0.8, 1.5, 0.7, amp_a=-0.05, amp_g=0.05)], r_max=4.0, name="gentle-pair"),
        bump_metric(0.7, 2.0, [Bump(1.8, 1.0, 1.4, 0.9, amp_a=0.08)], r_max=4.0, modulation=0.3, name="gentle-modulated"),
        bump_metric(0.7, 2.0, [Bump(1.5, 0.9, amp_g=0.05)], r_max=4.0, name="gentle-ring"),
    ]
    return {m.name: m for m in ms}


def cactus_suite() -> dict:
    """Cactus metrics with one or two overhanging arms."""
    ms = [
        cactus_metric(3.0, [(1.3, 1.5, 0.6, 8.0)], name="cactus-tall"),
        cactus_metric(3.0, [(1.3, 1.5, 0.8, 4.0)], name="cactus-wide"),
        cactus_metric(4.0, [(1.3, 1.0, 0.6, 8.0), (1.5, 3.0, 0.6, 6.0)], name="cactus-pair"),
    ]
    return {m.name: m for m in ms}


def bump_suite() -> dict:
    """The moderate bump preset together with the gentle metrics."""
    return {"bump": presets()["bump"], **gentle_suite()}


def collar_suite() -> dict:
    """Twelve metrics: constant curvature, single bumps and several bumps."""
    ms = [
        constant_curvature(1.0, 2.0, r_max=4.0),
        constant_curvature(1.0, 0.5, r_max=4.0),
        constant_curvature(2.0, 1.0, r_max=4.0),
        constant_curvature(0.5, 3.0, r_max=4.0),
        presets()["bump"],
        *(m for name, m in gentle_suite().items() if name != "gentle-ring"),
        *cactus_suite().values(),
    ]
    return {m.name if m.name != "constant-k1" else f"constant-k1-L{m.boundary_length:g}": m for m in ms}
