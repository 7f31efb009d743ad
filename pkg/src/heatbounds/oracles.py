"""Closed-form ground truth for the Monte Carlo and bound experiments.

Every evaluator here has an elementary derivation and, where it matters, a
second independent route (series vs method of images, closed form vs brute
force) exercised by the test suite.  The diffusion generator is
(Laplacian + Z)/2 throughout, so eigenfunction payoffs evolve by
e^{-lam t / 2} and the Euclidean semigroup at time t is the Gaussian of
variance t.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm


# ---------------------------------------------------------------------------
# Euclidean Gaussian semigroup
# ---------------------------------------------------------------------------

def euclid_heat_indicator(x: float, t: float, c: float = 0.0) -> float:
    """P_t 1_{(c, inf)}(x) = Phi((x - c)/sqrt(t)) for standard BM."""
    return float(norm.cdf((x - c) / math.sqrt(t)))


def euclid_heat_indicator_grad(x: float, t: float, c: float = 0.0) -> float:
    """d/dx of the above: the Gaussian density at (x - c)/sqrt(t)."""
    return float(norm.pdf((x - c) / math.sqrt(t)) / math.sqrt(t))


def ou_mean(x0: float, t: float) -> float:
    """E[X_t] for dX = -X/2 dt + dB: x0 e^{-t/2}."""
    return x0 * math.exp(-0.5 * t)


def ou_heat_indicator_grad(x: float, t: float, c: float = 0.0) -> float:
    """d/dx P_t 1_{(c, inf)}(x) for the OU diffusion dX = -X/2 dt + dB."""
    s = math.sqrt(-math.expm1(-t))       # stationary-scaled std at time t
    m = math.exp(-0.5 * t)
    return float(m * norm.pdf((x * m - c) / s) / s)


# ---------------------------------------------------------------------------
# half-space: survival probability and odd-extension heat flow
# ---------------------------------------------------------------------------

def halfspace_survival(x: float, t: float) -> float:
    """psi(t, x) = P(no exit by t from {y > 0}) = 2 Phi(x/sqrt(t)) - 1."""
    if x <= 0:
        return 0.0
    return float(2.0 * norm.cdf(x / math.sqrt(t)) - 1.0)


def halfspace_survival_grad(x: float, t: float) -> float:
    """d/dx psi(t, x) = 2 phi(x/sqrt(t))/sqrt(t); at x = 0 this equals
    sqrt(2/(pi t)), the equality case of the boundary gradient bound."""
    return float(2.0 * norm.pdf(x / math.sqrt(t)) / math.sqrt(t))


def halfspace_dirichlet_sin(x: float, t: float) -> float:
    """P^D_t sin (x) on the half-line: sin extends oddly, so the killed
    flow equals the free flow of sin: e^{-t/2} sin x."""
    return math.exp(-0.5 * t) * math.sin(x)


# ---------------------------------------------------------------------------
# interval eigen-expansions (series and method-of-images routes)
# ---------------------------------------------------------------------------

def _interval_coeffs(L: float, bc: str, u: Callable[[float], float],
                     j: int) -> float:
    if bc == "dirichlet":
        fn = lambda y: u(y) * math.sqrt(2.0 / L) * math.sin(j * math.pi * y / L)
    elif bc == "neumann":
        if j == 0:
            fn = lambda y: u(y) * math.sqrt(1.0 / L)
        else:
            fn = lambda y: u(y) * math.sqrt(2.0 / L) * math.cos(j * math.pi * y / L)
    else:
        raise ValueError(f"unknown bc {bc!r}")
    val, _ = quad(fn, 0.0, L, epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def interval_heat(L: float, bc: str, u: Callable[[float], float], x: float,
                  t: float, tail_tol: float = 1e-12,
                  u_sup: float = 1.0) -> float:
    """Eigen-expansion of the Dirichlet/Neumann heat flow at (t, x).

    Sum_j e^{-mu_j^2 t/2} c_j e_j(x), truncated once the remaining tail is
    provably below ``tail_tol`` (|c_j| <= sqrt(2L) u_sup and the heat
    weights are summable against a geometric majorant).
    """
    if not 0.0 <= x <= L:
        raise ValueError("x inside [0, L] required")
    if t <= 0:
        raise ValueError("t > 0 required")
    total = 0.0
    amp = math.sqrt(2.0 / L)
    j = 0 if bc == "neumann" else 1
    while True:
        mu = j * math.pi / L
        w = math.exp(-0.5 * mu * mu * t)
        # remaining-tail majorant: geometric from the next term on
        if j >= 1:
            nxt = math.exp(-0.5 * ((j * math.pi / L) ** 2) * t)
            tail = 2.0 * L * u_sup * amp * nxt / max(1e-300, 1.0 - math.exp(
                -0.5 * (2 * j + 1) * (math.pi / L) ** 2 * t))
            if tail < tail_tol and j > 2:
                break
        c = _interval_coeffs(L, bc, u, j)
        if bc == "dirichlet":
            e = amp * math.sin(mu * x)
        else:
            e = math.sqrt(1.0 / L) if j == 0 else amp * math.cos(mu * x)
        total += w * c * e
        j += 1
        if j > 4000:
            raise RuntimeError("series truncation failed")
    return total


def interval_heat_images(L: float, bc: str, u: Callable[[float], float],
                         x: float, t: float, n_images: int = 60,
                         quad_tol: float = 1e-12) -> float:
    """Method-of-images route: integrate u against the folded Gaussian kernel.

    Dirichlet kernel: sum over images with signs; Neumann: all positive.
    Independent of the eigen-series route, converges fast for moderate t/L^2.
    """
    s = math.sqrt(t)

    def kernel(y: float) -> float:
        total = 0.0
        for m in range(-n_images, n_images + 1):
            p = norm.pdf((y - x + 2.0 * m * L) / s) / s
            q = norm.pdf((y + x + 2.0 * m * L) / s) / s
            total += p - q if bc == "dirichlet" else p + q
        return total

    val, _ = quad(lambda y: u(y) * kernel(y), 0.0, L,
                  epsabs=quad_tol, epsrel=quad_tol, limit=400)
    return val


def interval_survival(L: float, x: float, t: float) -> float:
    """psi(t, x) on the interval: Dirichlet flow of u = 1."""
    return interval_heat(L, "dirichlet", lambda y: 1.0, x, t)


# ---------------------------------------------------------------------------
# sphere harmonics
# ---------------------------------------------------------------------------

def sphere2_z_semigroup(z: float, t: float) -> float:
    """P_t z on the unit 2-sphere: z is a first spherical harmonic with
    -Lap z = 2 z, so P_t z = e^{-t} z under the generator Lap/2."""
    return math.exp(-t) * z


def sphere2_z_gradient_sup() -> float:
    """sup |grad z| = 1 on the unit 2-sphere (attained on the equator)."""
    return 1.0


# ---------------------------------------------------------------------------
# interval isoperimetric constants and eigenvalues
# ---------------------------------------------------------------------------

def interval_cheeger_dirichlet(L: float) -> float:
    """kappa^D = 2/L: the whole interval minimizes boundary/volume."""
    return 2.0 / L


def interval_cheeger_neumann(L: float) -> float:
    """kappa^N = 2/L: a half interval [0, L/2] has one interior boundary
    point and volume L/2."""
    return 2.0 / L


def interval_cheeger_bruteforce(L: float, n: int = 400):
    """Scan subintervals (a, b) for the two Cheeger ratios (oracle check).

    Dirichlet counts the full topological boundary of (a, b); Neumann only
    the part interior to (0, L), over domains of volume <= L/2.
    """
    grid = np.linspace(0.0, L, n + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    vol = b - a
    ok = vol > 0
    best_d = float(np.min(np.where(ok, 2.0 / np.where(ok, vol, 1.0), np.inf)))
    inner = (a > 0).astype(float) + (b < L).astype(float)
    ok_n = ok & (vol <= L / 2.0) & (inner > 0)
    ratio_n = np.where(ok_n, inner / np.where(ok_n, vol, 1.0), np.inf)
    best_n = float(np.min(ratio_n))
    return best_d, best_n


def interval_lambda1(L: float):
    """(lambda_1^D, lambda_1^N) for -Lap on [0, L]: both (pi/L)^2."""
    v = (math.pi / L) ** 2
    return v, v


def eigen_ratio_interval_dirichlet() -> float:
    """||d sin||_inf / ||sin||_inf = 1 on [0, pi]."""
    return 1.0


def eigen_ratio_interval_neumann() -> float:
    """||d cos||_inf / ||cos||_inf = 1 on [0, pi]."""
    return 1.0
