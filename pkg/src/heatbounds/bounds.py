"""Closed-form gradient, regularity and isoperimetric bounds.

Every bound is a pure function of a curvature constant pack and scalar
parameters.  The recurring building block is the decay factor

    kappa(K, t) = (K / (e^{K t} - 1))^{1/2},   kappa(0, t) = 1/sqrt(t),

which controls |dP_t u| for the semigroup generated by (Laplacian + Z)/2
when Ric^Z >= K.  Bounds that hold "for all 0 < s <= t" are optimized by
golden-section search on a log axis with endpoints compared; removable
K -> 0 singularities are evaluated by series below |K| t = 1e-6.

Negative parts follow the convention K^- = max(0, -K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import numerics
from .geometry import CurvatureBounds

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def neg(x: float) -> float:
    """Negative part, returned as a nonnegative number."""
    return max(0.0, -x)


@dataclass
class BoundResult:
    """An evaluated bound: value, optimizing time (if any), and origin tag."""

    value: float
    minimizer_t: Optional[float]
    theorem_id: str

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# kappa factor and its time integral
# ---------------------------------------------------------------------------

def _bernoulli_factor(z: float) -> float:
    """z / (e^z - 1), continuous through z = 0."""
    if abs(z) < 1e-6:
        # 4th-order series around 0; relative error ~ z^4 / 720
        return 1.0 - z / 2.0 + z * z / 12.0 - z**4 / 720.0
    if z > 700.0:
        return math.exp(math.log(z) - z)
    return z / math.expm1(z)


def kappa(K: float, t: float) -> float:
    """(K/(e^{Kt}-1))^{1/2} with the K -> 0 limit 1/sqrt(t)."""
    if t <= 0:
        raise ValueError("t > 0 required")
    return math.sqrt(_bernoulli_factor(K * t) / t)


def kappa_time_term(K: float, t: float) -> float:
    """(1/2) * integral_0^t kappa(K, s) ds, in closed form.

    Cases: (1/sqrt(K)) arctan(sqrt(e^{Kt}-1)) for K > 0, sqrt(t) for K = 0,
    and (1/sqrt(-K)) log(sqrt(e^{-Kt}-1) + e^{-Kt/2}) for K < 0.
    """
    if t <= 0:
        raise ValueError("t > 0 required")
    z = K * t
    if abs(z) < 1e-6:
        return math.sqrt(t) * (1.0 - z / 12.0 + z * z / 480.0)
    if K > 0:
        if z > 700.0:
            # arctan(sqrt(e^z - 1)) = pi/2 - O(e^{-z/2})
            return 0.5 * math.pi / math.sqrt(K)
        return math.atan(math.sqrt(math.expm1(z))) / math.sqrt(K)
    kap = -K
    w = kap * t
    if w > 200.0:
        # log(sqrt(e^w - 1) + e^{w/2}) = w/2 + log 2 - O(e^{-w})
        return (0.5 * w + math.log(2.0)) / math.sqrt(kap)
    return math.log(math.sqrt(math.expm1(w)) + math.exp(0.5 * w)) / math.sqrt(kap)


def kappa_quadrature(K: float, t: float, tol: float = 1e-12) -> float:
    """(1/2) * integral_0^t kappa(K, s) ds by quadrature (oracle route).

    The substitution s = v^2 removes the 1/sqrt(s) singularity: the
    integrand becomes sqrt(z/(e^z - 1)) at z = K v^2, which is smooth.
    """
    if t <= 0:
        raise ValueError("t > 0 required")
    return numerics.adaptive_simpson(
        lambda v: math.sqrt(_bernoulli_factor(K * v * v)),
        0.0, math.sqrt(t), tol=tol)


# ---------------------------------------------------------------------------
# semigroup gradient bounds
# ---------------------------------------------------------------------------

def grad_bound_closed(K_Z: float, t: float) -> BoundResult:
    """|dP_t u| <= sqrt(2/pi) kappa(K_Z, t) ||u||_inf (no boundary)."""
    return BoundResult(SQRT_2_OVER_PI * kappa(K_Z, t), None, "thm1")


def eigen_grad_bound(lam: float, K_minus: float) -> BoundResult:
    """Uniform gradient bound for an eigenfunction with -Lu = lam u.

    Computes sqrt(2/pi) * inf_{t>0} (K^- e^{lam t} / (1 - e^{-K^- t}))^{1/2}
    numerically (golden section over log t on [1e-6/lam, 1e3/lam]).  The
    infimum admits the closed form
    sqrt(2/pi) (lam+K^-)^{1/2} ((lam+K^-)/lam)^{lam/(2K^-)}; see also
    ``eigen_grad_bound_printed`` for the variant with reciprocal base.
    """
    if lam <= 0:
        raise ValueError("lam > 0 required")
    if K_minus < 0:
        raise ValueError("K_minus >= 0 required")

    def log_envelope(t: float) -> float:
        if K_minus == 0.0:
            return lam * t - math.log(t)
        return (math.log(K_minus) + lam * t
                - math.log(-math.expm1(-K_minus * t)))

    t_star, log_min = numerics.minimize_log_scale(
        log_envelope, 1e-6 / lam, 1e3 / lam, rel_tol=1e-10)
    return BoundResult(SQRT_2_OVER_PI * math.exp(0.5 * log_min), t_star, "eigen")


def eigen_grad_bound_stationary(lam: float, K_minus: float) -> float:
    """Closed form of the infimum in ``eigen_grad_bound`` (stationary point).

    The first-order condition lam = (lam + K^-) e^{-K^- t} gives
    inf = (lam + K^-)^{1/2} ((lam + K^-)/lam)^{lam/(2 K^-)}, with K^- -> 0
    limit sqrt(e * lam).
    """
    if lam <= 0:
        raise ValueError("lam > 0 required")
    if K_minus < 1e-12 * lam:
        return SQRT_2_OVER_PI * math.sqrt(math.e * lam)
    expo = lam / (2.0 * K_minus) * math.log((lam + K_minus) / lam)
    return SQRT_2_OVER_PI * math.sqrt(lam + K_minus) * math.exp(expo)


def eigen_grad_bound_printed(lam: float, K_minus: float) -> float:
    """The companion closed form with base lam/(lam + K^-).

    This is smaller than the true infimum (the exponent's base is the
    reciprocal of the stationary-point value); it is exposed for
    side-by-side reporting, not used as a certified bound.
    """
    if lam <= 0:
        raise ValueError("lam > 0 required")
    if K_minus < 1e-12 * lam:
        return SQRT_2_OVER_PI * math.sqrt(lam / math.e)
    expo = lam / (2.0 * K_minus) * math.log(lam / (lam + K_minus))
    return SQRT_2_OVER_PI * math.sqrt(lam + K_minus) * math.exp(expo)


# ---------------------------------------------------------------------------
# Dirichlet boundary
# ---------------------------------------------------------------------------

def alpha0(theta_H: float, K_0: float, d: int, Z_sup: float) -> float:
    """Boundary constant (max{theta^-, sqrt((d-1) K_0^-)} + sup|Z|) / 2."""
    if d < 1:
        raise ValueError("d >= 1 required")
    if Z_sup < 0:
        raise ValueError("Z_sup >= 0 required")
    return 0.5 * (max(neg(theta_H), math.sqrt((d - 1) * neg(K_0))) + Z_sup)


def c_of_s(s: float, a0: float) -> float:
    """C(s) = sqrt(2/pi) + sqrt(s) a0 min{2, 1 + a0 sqrt(s/(2 pi))}."""
    if s <= 0:
        raise ValueError("s > 0 required")
    if a0 < 0:
        raise ValueError("a0 >= 0 required")
    return SQRT_2_OVER_PI + math.sqrt(s) * a0 * min(
        2.0, 1.0 + a0 * math.sqrt(s / (2.0 * math.pi)))


def psi_boundary_gradient_bound(s: float, a0: float) -> float:
    """Bound on |d psi(s, .)| at the boundary for the exit probability psi.

    sqrt(2/(pi s)) + min{2 a0, a0 + a0^2 sqrt(s/(2 pi))}; for a0 = 0 this is
    attained with equality on a flat half-space.
    """
    if s <= 0:
        raise ValueError("s > 0 required")
    return math.sqrt(2.0 / (math.pi * s)) + min(
        2.0 * a0, a0 + a0 * a0 * math.sqrt(s / (2.0 * math.pi)))


def _dirichlet_profile(s: float, K_Z: float, a0: float) -> float:
    c = c_of_s(s, a0)
    return math.exp(0.5 * neg(K_Z) * s) / math.sqrt(s) * (c + 0.25 / c)


def dirichlet_grad_bound(K_Z: float, a0: float, t: float) -> BoundResult:
    """|dP^D_t u| bound: inf over s in (0, t] of
    e^{K^- s/2}/sqrt(s) * (C(s) + 1/(4 C(s)))."""
    if t <= 0:
        raise ValueError("t > 0 required")
    s_star, val = numerics.minimize_log_scale(
        lambda s: _dirichlet_profile(s, K_Z, a0), t * 1e-12, t, rel_tol=1e-10)
    return BoundResult(val, s_star, "thm2")


def dirichlet_eigen_bound(lam: float, K_minus: float, a0: float) -> BoundResult:
    """Gradient bound for a Dirichlet eigenfunction with -Lu = lam u.

    Evaluated as inf_{t>0} e^{(lam+K^-)t/2}/sqrt(t) (C(t) + 1/(4C(t)))
    directly from the semigroup bound (the eigen-relation P^D_t u =
    e^{-lam t/2} u), rather than from any pre-substituted display.
    """
    if lam <= 0:
        raise ValueError("lam > 0 required")
    rate = lam + K_minus

    def objective(t: float) -> float:
        c = c_of_s(t, a0)
        return math.exp(0.5 * rate * t) / math.sqrt(t) * (c + 0.25 / c)

    t_star, val = numerics.minimize_log_scale(
        objective, 1e-6 / rate, 1e3 / rate, rel_tol=1e-10)
    return BoundResult(val, t_star, "eigen-dirichlet")


# ---------------------------------------------------------------------------
# Neumann boundary
# ---------------------------------------------------------------------------

def neumann_grad_bound(K_phi: float, phi_sup: float, t: float) -> BoundResult:
    """|dP^N_t u| <= sqrt(2/pi) kappa(K_phi, t) ||phi||_inf ||u||_inf."""
    if phi_sup < 1.0:
        raise ValueError("phi_sup >= 1 required (inf phi = 1)")
    return BoundResult(SQRT_2_OVER_PI * kappa(K_phi, t) * phi_sup, None, "thm3")


def ell(t: float, k: float, theta_II: float) -> float:
    """ell(t) = cos(sqrt(k) t) - (theta/sqrt(k)) sin(sqrt(k) t); k -> 0 gives
    1 - theta t."""
    if k < 0 or theta_II < 0:
        raise ValueError("k, theta_II >= 0 required")
    if k < 1e-14:
        return 1.0 - theta_II * t
    rk = math.sqrt(k)
    return math.cos(rk * t) - theta_II / rk * math.sin(rk * t)


def r1(r0: float, k: float, theta_II: float) -> float:
    """First zero of ell capped at the collar radius: r0 ^ ell^{-1}(0).

    Closed form (1/sqrt(k)) arcsin(sqrt(k/(k + theta^2))); k -> 0 limit
    r0 ^ 1/theta.  For k = theta = 0, ell has no zero and r1 = r0.
    """
    if r0 < 0 or k < 0 or theta_II < 0:
        raise ValueError("nonnegative arguments required")
    if k < 1e-14:
        if theta_II == 0.0:
            return r0          # ell is identically 1: no zero exists
        return min(r0, 1.0 / theta_II)
    zero = math.asin(math.sqrt(k / (k + theta_II**2))) / math.sqrt(k)
    return min(r0, zero)


def log_phi(rho: float, pack: CurvatureBounds, d: int,
            tol: float = 1e-10) -> float:
    """log of the explicit conformal factor at boundary distance rho.

    Double-integral construction:
        log phi = (sigma/alpha) * int_0^rho (ell(s)-ell(r1))^{1-d}
                   * int_{s ^ r1}^{r1} (ell(u)-ell(r1))^{d-1} du ds,
    with alpha = (1-ell(r1))^{1-d} int_0^{r1} (ell(s)-ell(r1))^{d-1} ds.
    Constant for rho >= r1; zero on the boundary.
    """
    if rho < 0:
        raise ValueError("rho >= 0 required")
    sigma = pack.sigma
    if sigma == 0.0 or rho == 0.0:
        return 0.0
    k, th = pack.k, pack.theta_II
    rr1 = r1(pack.r0, k, th)
    if rr1 <= 0:
        raise ValueError("r1 = 0: collar construction degenerates")
    ell_r1 = ell(rr1, k, th)

    def inner(s: float) -> float:
        lo = min(s, rr1)
        if lo >= rr1:
            return 0.0
        return numerics.adaptive_simpson(
            lambda u: (ell(u, k, th) - ell_r1) ** (d - 1), lo, rr1, tol=tol / 10)

    def outer_integrand(s: float) -> float:
        if s >= rr1:
            return 0.0      # inner integral vanishes; the limit is 0
        den = ell(s, k, th) - ell_r1
        if den <= 0.0:
            return 0.0
        return den ** (1 - d) * inner(s)

    alpha = (1.0 - ell_r1) ** (1 - d) * numerics.adaptive_simpson(
        lambda s: (ell(s, k, th) - ell_r1) ** (d - 1), 0.0, rr1, tol=tol / 10)
    upper = min(rho, rr1)
    val = numerics.adaptive_simpson(outer_integrand, 0.0, upper, tol=tol)
    return sigma / alpha * val


def phi_sup_bound(pack: CurvatureBounds, d: int) -> float:
    """||phi||_inf <= exp(sigma d r1 / 2) for the explicit construction."""
    return math.exp(0.5 * pack.sigma * d * r1(pack.r0, pack.k, pack.theta_II))


def k_phi_explicit(pack: CurvatureBounds, d: int) -> float:
    """Curvature constant of the explicit conformal change:
    K_Z - 2 sigma delta_{r0}(Z) - 2 sigma d / r1 - 2 sigma^2."""
    rr1 = r1(pack.r0, pack.k, pack.theta_II)
    if pack.sigma > 0 and rr1 <= 0:
        raise ValueError("r1 = 0: explicit Neumann constant undefined")
    correction = 0.0
    if pack.sigma > 0:
        correction = (2.0 * pack.sigma * pack.Z_collar
                      + 2.0 * pack.sigma * d / rr1
                      + 2.0 * pack.sigma**2)
    return pack.K_Z - correction


@dataclass
class NeumannExplicitResult:
    """The two printed forms of the explicit Neumann bound plus constants."""

    value_s: float        # sqrt(2/(pi s)) exp(sigma d r1/2 + K_phi^- s / 2)
    value_t: float        # the t-only form with the max{., 1} factor
    phi_sup: float
    k_phi: float
    r1: float


def neumann_explicit_bound(pack: CurvatureBounds, d: int,
                           s: float, t: float) -> NeumannExplicitResult:
    """Explicit Neumann gradient bound built from boundary geometry.

    ``value_s`` is the bound for any 0 < s <= t; ``value_t`` the coarser
    t-only version.  For sigma = 0 (convex boundary) both reduce to the
    unweighted forms with K_Z.
    """
    if not (0 < s <= t):
        raise ValueError("0 < s <= t required")
    rr1 = r1(pack.r0, pack.k, pack.theta_II)
    if pack.sigma > 0 and rr1 <= 0:
        raise ValueError("r1 = 0: explicit Neumann bound undefined")
    kphi = k_phi_explicit(pack, d)
    sig = pack.sigma
    value_s = math.sqrt(2.0 / (math.pi * s)) * math.exp(
        0.5 * sig * d * rr1 + 0.5 * neg(kphi) * s)
    inner = pack.K_Z
    if sig > 0:
        inner = (pack.K_Z - sig * pack.Z_collar - sig * d / rr1
                 - 2.0 * sig**2)
    value_t = math.sqrt(
        2.0 * math.exp(sig * d * rr1 + 1.0) / (math.pi * min(t, 1.0))
    ) * math.sqrt(max(neg(inner), 1.0))
    return NeumannExplicitResult(value_s=value_s, value_t=value_t,
                                 phi_sup=phi_sup_bound(pack, d),
                                 k_phi=kphi, r1=rr1)


# ---------------------------------------------------------------------------
# C^2 ("value plus Laplacian") bounds
# ---------------------------------------------------------------------------

def c2_bound(K_Z: float, t: float, u_sup: float, Lu_sup: float,
             check: bool = False) -> BoundResult:
    """|du| <= sqrt(2/pi) (kappa(K,t) ||u|| + [(1/2) int_0^t kappa] ||Lu||).

    The time integral is the three-case closed form of
    ``kappa_time_term``; with ``check`` the quadrature route is evaluated
    too and agreement to 1e-8 asserted.
    """
    if t <= 0:
        raise ValueError("t > 0 required")
    if u_sup < 0 or Lu_sup < 0:
        raise ValueError("sup norms must be nonnegative")
    closed = SQRT_2_OVER_PI * (kappa(K_Z, t) * u_sup
                               + kappa_time_term(K_Z, t) * Lu_sup)
    if check:
        quad = c2_bound_quadrature(K_Z, t, u_sup, Lu_sup)
        assert abs(closed - quad) <= 1e-8, (K_Z, t, closed, quad)
    return BoundResult(closed, None, "thm-c2")


def c2_bound_quadrature(K_Z: float, t: float, u_sup: float,
                        Lu_sup: float) -> float:
    """Same bound with the time integral done by adaptive quadrature."""
    return SQRT_2_OVER_PI * (kappa(K_Z, t) * u_sup
                             + kappa_quadrature(K_Z, t) * Lu_sup)


def _minimized_bracket_series(beta: float) -> float:
    # sqrt(1+b) + asinh(sqrt b)/sqrt b  (and the arctan twin for b < 0)
    # share the expansion 2 + b/3 - b^2/20 + O(b^3) around 0
    return 2.0 + beta / 3.0 - beta * beta / 20.0


def c2_bound_minimized(K_Z: float, u_sup: float, Lu_sup: float) -> BoundResult:
    """Time-optimized version of ``c2_bound`` (four printed cases).

    With beta = -K ||u||/||Lu||, the squared-gradient bound is
    (2/pi)||u|| ||Lu|| (sqrt(1+beta) + asinh(sqrt beta)/sqrt beta)^2 for
    K < 0, (8/pi)||u|| ||Lu|| for K = 0, the arctan twin for
    0 < K < ||Lu||/||u||, and sqrt(pi/(2K)) ||Lu|| for K >= ||Lu||/||u||
    (where the infimum of the unsquared bound is approached as t -> inf and
    the printed value is that unsquared limit).
    """
    if Lu_sup <= 0:
        raise ValueError("Lu_sup > 0 required")
    if u_sup < 0:
        raise ValueError("u_sup >= 0 required")
    beta = -K_Z * u_sup / Lu_sup
    if K_Z > 0 and beta <= -1.0:
        # harmonic-type regime: monotone decreasing envelope
        return BoundResult(math.sqrt(math.pi / (2.0 * K_Z)) * Lu_sup,
                           math.inf, "cor-min")
    if abs(beta) < 1e-6:
        bracket = _minimized_bracket_series(beta)
        t_star = u_sup / Lu_sup if Lu_sup > 0 else math.inf
    elif beta > 0:
        sb = math.sqrt(beta)
        bracket = math.sqrt(1.0 + beta) + math.asinh(sb) / sb
        t_star = math.log1p(beta) / (-K_Z)
    else:
        g = -beta
        bracket = (math.sqrt(1.0 + beta)
                   + math.atan(math.sqrt(g / (1.0 + beta))) / math.sqrt(g))
        t_star = -math.log1p(beta) / K_Z
    value = 2.0 / math.pi * u_sup * Lu_sup * bracket**2
    return BoundResult(value, t_star, "cor-min")


def c2_bound_min_numeric(K_Z: float, u_sup: float,
                         Lu_sup: float) -> Tuple[float, float]:
    """Independent numerical minimization of ``c2_bound`` over t.

    Grid pre-scan plus scipy bounded minimization; serves as the oracle the
    printed cases of ``c2_bound_minimized`` are checked against.
    """
    from scipy.optimize import minimize_scalar

    if Lu_sup <= 0:
        raise ValueError("Lu_sup > 0 required")
    t_scale = max(u_sup / Lu_sup, 1e-8)
    lo = 1e-8 * min(1.0, t_scale)
    hi = 1e4 * max(1.0, t_scale)
    if K_Z > 0:
        hi = max(hi, 400.0 / K_Z)
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), 400))
    vals = [c2_bound(K_Z, float(t), u_sup, Lu_sup).value for t in grid]
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda lt: c2_bound(K_Z, math.exp(lt), u_sup, Lu_sup).value,
        bounds=(math.log(a), math.log(b)), method="bounded",
        options={"xatol": 1e-12})
    t_best = math.exp(res.x)
    v_best = min(res.fun, vals[i])
    if vals[i] < res.fun:
        t_best = float(grid[i])
    return t_best, float(v_best)


def c2_bound_simple(K_minus: float, delta: float, u_sup: float,
                    Lu_sup: float) -> BoundResult:
    """sqrt(2/pi) e^{K^-/(2 delta^2)} (delta ||u|| + ||Lu||/delta)."""
    if delta <= 0:
        raise ValueError("delta > 0 required")
    val = SQRT_2_OVER_PI * math.exp(K_minus / (2.0 * delta**2)) * (
        delta * u_sup + Lu_sup / delta)
    return BoundResult(val, None, "cor-1")


def c2_dirichlet_bound(K_minus: float, a0: float, delta: float,
                       u_sup: float, Lu_sup: float) -> BoundResult:
    """Dirichlet version (u vanishing on the boundary):
    e^{K^-/(2 d^2)} (sqrt(2/pi) + sqrt(pi/2)/4 + 2 a0/d)(d||u|| + ||Lu||/d)."""
    if delta <= 0:
        raise ValueError("delta > 0 required")
    front = SQRT_2_OVER_PI + 0.25 * math.sqrt(math.pi / 2.0) + 2.0 * a0 / delta
    val = math.exp(K_minus / (2.0 * delta**2)) * front * (
        delta * u_sup + Lu_sup / delta)
    return BoundResult(val, None, "c1-d")


def c2_neumann_bound(K_phi_minus: float, phi_sup: float, delta: float,
                     u_sup: float, Lu_sup: float) -> BoundResult:
    """Neumann version (normal derivative vanishing):
    sqrt(2/pi) e^{K_phi^-/(2 d^2)} ||phi|| (d||u|| + ||Lu||/d)."""
    if delta <= 0:
        raise ValueError("delta > 0 required")
    if phi_sup < 1.0:
        raise ValueError("phi_sup >= 1 required")
    val = SQRT_2_OVER_PI * math.exp(K_phi_minus / (2.0 * delta**2)) * \
        phi_sup * (delta * u_sup + Lu_sup / delta)
    return BoundResult(val, None, "c1-n")


def c2_neumann_explicit(pack: CurvatureBounds, d: int, delta: float,
                        u_sup: float, Lu_sup: float) -> BoundResult:
    """Explicit-geometry Neumann version: substitutes the constructed
    phi_sup = e^{sigma d r1/2} and K_phi from the collar constants."""
    if delta <= 0:
        raise ValueError("delta > 0 required")
    kphi = k_phi_explicit(pack, d)
    res = c2_neumann_bound(neg(kphi), phi_sup_bound(pack, d), delta,
                           u_sup, Lu_sup)
    return BoundResult(res.value, None, "cor-c1-d")


# ---------------------------------------------------------------------------
# isoperimetric lower bounds
# ---------------------------------------------------------------------------

def iso_lower_bounds(c_D: float, c_N: float, lam1_D: float,
                     lam1_N: float) -> Tuple[float, float]:
    """Generic Cheeger-type lower bounds from semigroup gradient constants.

    If |dP^D_{2t} f| <= c_D/sqrt(t ^ 1) ||f|| then
    kappa^D >= (1 - 1/e)(sqrt(l1) ^ l1)/c_D, and the Neumann analogue is
    kappa^N >= (1 - 2/e)(sqrt(l1) ^ l1)/(2 c_N).
    """
    if c_D <= 0 or c_N <= 0:
        raise ValueError("c > 0 required")
    if lam1_D < 0 or lam1_N < 0:
        raise ValueError("lam1 >= 0 required")
    mD = min(math.sqrt(lam1_D), lam1_D)
    mN = min(math.sqrt(lam1_N), lam1_N)
    return ((1.0 - math.exp(-1.0)) * mD / c_D,
            (1.0 - 2.0 * math.exp(-1.0)) * mN / (2.0 * c_N))


def iso_explicit_dirichlet(K_Z: float, a0: float, lam1: float) -> float:
    """sqrt(pi)(1/e - 1/e^2)(sqrt(l1) ^ l1) /
    (max{sqrt(K^-), 1}(1 + pi/8) + 2 a0 sqrt(pi))."""
    if lam1 < 0:
        raise ValueError("lam1 >= 0 required")
    m = min(math.sqrt(lam1), lam1)
    num = math.sqrt(math.pi) * (math.exp(-1.0) - math.exp(-2.0)) * m
    den = max(math.sqrt(neg(K_Z)), 1.0) * (1.0 + math.pi / 8.0) \
        + 2.0 * a0 * math.sqrt(math.pi)
    return num / den


def iso_explicit_neumann(K_phi: float, phi_sup: float, lam1: float) -> float:
    """sqrt(pi)(1/e - 2/e^2)(sqrt(l1) ^ l1) /
    (2 max{sqrt(K_phi^-), 1} ||phi||)."""
    if lam1 < 0:
        raise ValueError("lam1 >= 0 required")
    if phi_sup < 1.0:
        raise ValueError("phi_sup >= 1 required")
    m = min(math.sqrt(lam1), lam1)
    num = math.sqrt(math.pi) * (math.exp(-1.0) - 2.0 * math.exp(-2.0)) * m
    den = 2.0 * max(math.sqrt(neg(K_phi)), 1.0) * phi_sup
    return num / den


def iso_explicit(pack: CurvatureBounds, d: int, lam1: float,
                 phi_sup: Optional[float] = None,
                 K_phi: Optional[float] = None) -> Tuple[float, float]:
    """Explicit Dirichlet and Neumann isoperimetric lower bounds from a pack.

    The Neumann side defaults to the constructed conformal factor constants
    when ``phi_sup``/``K_phi`` are not supplied.
    """
    a0 = alpha0(pack.theta_H, pack.K_0, d, pack.Z_sup)
    if phi_sup is None:
        phi_sup = phi_sup_bound(pack, d)
    if K_phi is None:
        K_phi = k_phi_explicit(pack, d)
    return (iso_explicit_dirichlet(pack.K_Z, a0, lam1),
            iso_explicit_neumann(K_phi, phi_sup, lam1))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def useest_check(t: float, c: float) -> bool:
    """(t ^ 1/(c v 1))^{-1/2} <= max{sqrt(c), 1}/sqrt(t ^ 1), any c >= 0."""
    if t <= 0:
        raise ValueError("t > 0 required")
    if c < 0:
        raise ValueError("c >= 0 required")
    lhs = min(t, 1.0 / max(c, 1.0)) ** -0.5
    rhs = max(math.sqrt(c), 1.0) / math.sqrt(min(t, 1.0))
    return lhs <= rhs * (1.0 + 1e-12)


def sogge_exponent(p: float, d: int) -> float:
    """max{(d-1)/2 - d/p, ((d-1)/2)(1/2 - 1/p)} for p >= 2 (p = inf allowed)."""
    if p < 2:
        raise ValueError("p >= 2 required")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return max((d - 1) / 2.0 - d * inv_p, (d - 1) / 2.0 * (0.5 - inv_p))
