"""Analytic eigenbases, unit band spectral projections, and scaling scans.

Model domains with closed-form eigenfunctions of the Laplacian replace
general compact manifolds: intervals (Dirichlet/Neumann), circles and
rectangles.  Frequencies mu_j = sqrt(eigenvalue of -Lap) index the modes;
the unit band projection at lambda collects every mode with
mu_j in [lambda, lambda+1).  Band selection by the eigenvalue reading
(mu_j^2 in the band) is reported alongside for comparison, since the two
diverge beyond lambda = 1; all norms use the frequency reading, which is
the one under which the sup-norm scaling laws

    ||chi_lam f||_inf ~ lam^{(d-1)/2},  ||d chi_lam f||_inf ~ lam^{(d+1)/2},
    ||Lap chi_lam f||_inf ~ lam^{(d+3)/2}

hold with d the domain dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import bounds


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalBasis:
    length: float
    bc: str = "dirichlet"          # 'dirichlet' | 'neumann'

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length > 0 required")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown bc {self.bc!r}")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class CircleBasis:
    length: float                  # circumference; x in [0, L)

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length > 0 required")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class RectangleBasis:
    lx: float
    ly: float
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("side lengths > 0 required")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown bc {self.bc!r}")

    @property
    def dim(self) -> int:
        return 2


Basis = object  # union of the three dataclasses above


@dataclass
class Mode:
    """One eigenfunction: frequency mu (so -Lap e = mu^2 e) and evaluators."""

    freq: float
    label: tuple
    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]    # shape (..., dim)


def modes_up_to(basis, freq_max: float) -> List[Mode]:
    """All modes with frequency <= freq_max, sorted by frequency."""
    out: List[Mode] = []
    if isinstance(basis, IntervalBasis):
        L = basis.length
        amp = math.sqrt(2.0 / L)
        if basis.bc == "neumann":
            c0 = math.sqrt(1.0 / L)
            out.append(Mode(0.0, (0,),
                            lambda x, c0=c0: np.full(np.shape(np.asarray(x)[..., 0]), c0),
                            lambda x: np.zeros_like(np.asarray(x, dtype=float))))
        j = 1
        while j * math.pi / L <= freq_max + 1e-12:
            mu = j * math.pi / L
            if basis.bc == "dirichlet":
                out.append(Mode(mu, (j,),
                                lambda x, mu=mu, a=amp: a * np.sin(mu * np.asarray(x)[..., 0]),
                                lambda x, mu=mu, a=amp: (a * mu * np.cos(mu * np.asarray(x)[..., 0]))[..., None]))
            else:
                out.append(Mode(mu, (j,),
                                lambda x, mu=mu, a=amp: a * np.cos(mu * np.asarray(x)[..., 0]),
                                lambda x, mu=mu, a=amp: (-a * mu * np.sin(mu * np.asarray(x)[..., 0]))[..., None]))
            j += 1
        return out
    if isinstance(basis, CircleBasis):
        L = basis.length
        amp = math.sqrt(2.0 / L)
        out.append(Mode(0.0, (0, "c"),
                        lambda x, c0=math.sqrt(1.0 / L): np.full(np.shape(np.asarray(x)[..., 0]), c0),
                        lambda x: np.zeros_like(np.asarray(x, dtype=float))))
        k = 1
        while 2.0 * math.pi * k / L <= freq_max + 1e-12:
            mu = 2.0 * math.pi * k / L
            out.append(Mode(mu, (k, "cos"),
                            lambda x, mu=mu, a=amp: a * np.cos(mu * np.asarray(x)[..., 0]),
                            lambda x, mu=mu, a=amp: (-a * mu * np.sin(mu * np.asarray(x)[..., 0]))[..., None]))
            out.append(Mode(mu, (k, "sin"),
                            lambda x, mu=mu, a=amp: a * np.sin(mu * np.asarray(x)[..., 0]),
                            lambda x, mu=mu, a=amp: (a * mu * np.cos(mu * np.asarray(x)[..., 0]))[..., None]))
            k += 1
        return out
    if isinstance(basis, RectangleBasis):
        lx, ly = basis.lx, basis.ly
        j0 = 1 if basis.bc == "dirichlet" else 0
        jmax = int(freq_max * lx / math.pi) + 1
        kmax = int(freq_max * ly / math.pi) + 1
        for j in range(j0, jmax + 1):
            for k in range(j0, kmax + 1):
                mjx = j * math.pi / lx
                mky = k * math.pi / ly
                mu = math.hypot(mjx, mky)
                if mu > freq_max + 1e-12:
                    continue
                out.append(_rectangle_mode(basis, j, k))
        out.sort(key=lambda m: m.freq)
        return out
    raise ValueError(f"unknown basis {basis!r}")


def _rectangle_mode(basis: RectangleBasis, j: int, k: int) -> Mode:
    lx, ly = basis.lx, basis.ly
    mjx = j * math.pi / lx
    mky = k * math.pi / ly
    mu = math.hypot(mjx, mky)
    if basis.bc == "dirichlet":
        a = 2.0 / math.sqrt(lx * ly)

        def fn(x, a=a, mjx=mjx, mky=mky):
            x = np.asarray(x, dtype=float)
            return a * np.sin(mjx * x[..., 0]) * np.sin(mky * x[..., 1])

        def grad(x, a=a, mjx=mjx, mky=mky):
            x = np.asarray(x, dtype=float)
            gx = a * mjx * np.cos(mjx * x[..., 0]) * np.sin(mky * x[..., 1])
            gy = a * mky * np.sin(mjx * x[..., 0]) * np.cos(mky * x[..., 1])
            return np.stack([gx, gy], axis=-1)
    else:
        ax = math.sqrt((1.0 if j == 0 else 2.0) / lx)
        ay = math.sqrt((1.0 if k == 0 else 2.0) / ly)
        a = ax * ay

        def fn(x, a=a, mjx=mjx, mky=mky):
            x = np.asarray(x, dtype=float)
            return a * np.cos(mjx * x[..., 0]) * np.cos(mky * x[..., 1])

        def grad(x, a=a, mjx=mjx, mky=mky):
            x = np.asarray(x, dtype=float)
            gx = -a * mjx * np.sin(mjx * x[..., 0]) * np.cos(mky * x[..., 1])
            gy = -a * mky * np.cos(mjx * x[..., 0]) * np.sin(mky * x[..., 1])
            return np.stack([gx, gy], axis=-1)

    return Mode(mu, (j, k), fn, grad)


def _domain_box(basis) -> List[Tuple[float, float]]:
    if isinstance(basis, IntervalBasis):
        return [(0.0, basis.length)]
    if isinstance(basis, CircleBasis):
        return [(0.0, basis.length)]
    if isinstance(basis, RectangleBasis):
        return [(0.0, basis.lx), (0.0, basis.ly)]
    raise ValueError(f"unknown basis {basis!r}")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _gl_panels_1d(fn: Callable, a: float, b: float, tol: float) -> float:
    """Panel Gauss-Legendre with panel-doubling until the value settles."""
    prev = None
    panels = 16
    while panels <= 1 << 16:
        edges = np.linspace(a, b, panels + 1)
        lo = edges[:-1]
        half = 0.5 * (edges[1:] - lo)
        xs = (lo[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)).ravel()
        ws = (half[:, None] * np.broadcast_to(_GL_WEIGHTS, (panels, 10))).ravel()
        val = float(ws @ fn(xs[:, None]))
        if prev is not None and abs(val - prev) <= max(tol, tol * abs(val)):
            return val
        prev = val
        panels *= 2
    raise RuntimeError("quadrature did not settle")


def inner_product(basis, f: Callable, g: Callable, tol: float = 1e-10) -> float:
    """L^2 inner product over the domain by adaptive quadrature."""
    box = _domain_box(basis)
    if len(box) == 1:
        (a, b), = box
        return _gl_panels_1d(lambda x: np.asarray(f(x)) * np.asarray(g(x)),
                             a, b, tol)
    # tensor Gauss-Legendre for rectangles; node count tracks the
    # oscillation of the integrand, with a doubling check
    return _rect_inner(box, f, g, n=256)


def _rect_inner(box, f, g, n: int) -> float:
    (ax, bx), (ay, by) = box
    xg, wx = np.polynomial.legendre.leggauss(n)
    yg, wy = np.polynomial.legendre.leggauss(n)
    xs = 0.5 * (bx - ax) * (xg + 1.0) + ax
    ys = 0.5 * (by - ay) * (yg + 1.0) + ay
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.stack([X, Y], axis=-1)
    vals = f(P) * g(P)
    return float(wx @ vals @ wy) * 0.25 * (bx - ax) * (by - ay)


# ---------------------------------------------------------------------------
# band projection
# ---------------------------------------------------------------------------

@dataclass
class BandProjection:
    """chi_lambda f: the selected modes and their coefficients."""

    lam: float
    basis: object
    modes: List[Mode]
    coeffs: np.ndarray
    convention: str = "frequency"

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c, m in zip(self.coeffs, self.modes):
            out = out + c * m.fn(x)
        return out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, m in zip(self.coeffs, self.modes):
            out = out + c * m.grad(x)
        return out

    def laplacian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c, m in zip(self.coeffs, self.modes):
            out = out - c * m.freq**2 * m.fn(x)
        return out

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def band_indices(modes: Sequence[Mode], lam: float,
                 convention: str = "frequency") -> List[int]:
    """Indices of modes in the unit band at lam under either reading."""
    if convention == "frequency":
        return [i for i, m in enumerate(modes)
                if lam <= m.freq < lam + 1.0]
    if convention == "eigenvalue":
        return [i for i, m in enumerate(modes)
                if lam <= m.freq**2 < lam + 1.0]
    raise ValueError(f"unknown convention {convention!r}")


def project(basis, f: Callable, lam: float,
            convention: str = "frequency",
            tol: float = 1e-10) -> BandProjection:
    """Unit band projection of f: coefficients by adaptive quadrature.

    An empty band is legal and yields the zero projection.
    """
    if lam < 0:
        raise ValueError("lam >= 0 required")
    freq_max = lam + 1.0 if convention == "frequency" else math.sqrt(lam + 1.0)
    all_modes = modes_up_to(basis, freq_max + 1e-9)
    idx = band_indices(all_modes, lam, convention)
    selected = [all_modes[i] for i in idx]
    coeffs = np.array([inner_product(basis, f, m.fn, tol=tol)
                       for m in selected])
    return BandProjection(lam=lam, basis=basis, modes=selected,
                          coeffs=coeffs, convention=convention)


def _grid(basis, n: int) -> np.ndarray:
    box = _domain_box(basis)
    if len(box) == 1:
        (a, b), = box
        return np.linspace(a, b, n)[:, None]
    (ax, bx), (ay, by) = box
    # 2-D: n is the per-axis resolution
    xs = np.linspace(ax, bx, n)
    ys = np.linspace(ay, by, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([X, Y], axis=-1).reshape(-1, 2)


def sup_gradient(proj: BandProjection, n_grid: Optional[int] = None) -> float:
    """sup |d chi_lam f| over a uniform grid of the domain."""
    if not proj.modes:
        return 0.0
    dim = proj.basis.dim
    if n_grid is None:
        n_grid = 10001 if dim == 1 else 512
    pts = _grid(proj.basis, n_grid)
    g = proj.gradient(pts)
    return float(np.max(np.linalg.norm(g, axis=-1)))


def sup_value(proj: BandProjection, n_grid: Optional[int] = None) -> float:
    if not proj.modes:
        return 0.0
    dim = proj.basis.dim
    if n_grid is None:
        n_grid = 10001 if dim == 1 else 512
    pts = _grid(proj.basis, n_grid)
    return float(np.max(np.abs(proj.evaluate(pts))))


def sup_laplacian(proj: BandProjection, n_grid: Optional[int] = None) -> float:
    if not proj.modes:
        return 0.0
    dim = proj.basis.dim
    if n_grid is None:
        n_grid = 10001 if dim == 1 else 512
    pts = _grid(proj.basis, n_grid)
    return float(np.max(np.abs(proj.laplacian(pts))))


# ---------------------------------------------------------------------------
# scaling scan
# ---------------------------------------------------------------------------

@dataclass
class ScanRow:
    lam: float
    n_modes: int               # frequency reading
    n_modes_eig: int           # eigenvalue reading, reported for comparison
    sup_u: float
    sup_grad: float
    sup_lap: float


@dataclass
class ScanTable:
    basis: object
    rows: List[ScanRow]
    f_l2: float

    def slopes(self) -> dict:
        """Least-squares log-log slopes of each sup-norm column vs lam."""
        lams, su, sg, sl = [], [], [], []
        for r in self.rows:
            if r.sup_u > 0 and r.sup_grad > 0 and r.sup_lap > 0:
                lams.append(r.lam)
                su.append(r.sup_u)
                sg.append(r.sup_grad)
                sl.append(r.sup_lap)
        if len(lams) < 2:
            raise ValueError("not enough nonempty bands for a slope fit")
        x = np.log(lams)
        return {
            "sup_u": float(np.polyfit(x, np.log(su), 1)[0]),
            "sup_grad": float(np.polyfit(x, np.log(sg), 1)[0]),
            "sup_lap": float(np.polyfit(x, np.log(sl), 1)[0]),
        }


def flat_spectrum(basis, freq_max: float) -> Callable:
    """f with unit coefficient on every mode of frequency in (0, freq_max]."""
    ms = [m for m in modes_up_to(basis, freq_max) if m.freq > 0]

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for m in ms:
            out = out + m.fn(x)
        return out

    return f


def scaling_scan(basis, f: Callable, lam_list: Sequence[float],
                 n_grid: Optional[int] = None, tol: float = 1e-10) -> ScanTable:
    """Project f on each unit band and tabulate sup norms.

    The eigenvalue-reading mode count is carried per row so the two band
    conventions can be compared where they diverge.
    """
    if min(lam_list) < 1:
        raise ValueError("lam >= 1 required for the scaling laws")
    freq_max = max(lam_list) + 1.0
    all_modes = modes_up_to(basis, freq_max + 1e-9)
    rows = []
    for lam in lam_list:
        idx = band_indices(all_modes, lam, "frequency")
        idx_eig = band_indices(all_modes, lam, "eigenvalue")
        selected = [all_modes[i] for i in idx]
        coeffs = np.array([inner_product(basis, f, m.fn, tol=tol)
                           for m in selected])
        proj = BandProjection(lam=lam, basis=basis, modes=selected,
                              coeffs=coeffs)
        rows.append(ScanRow(lam=lam, n_modes=len(idx), n_modes_eig=len(idx_eig),
                            sup_u=sup_value(proj, n_grid),
                            sup_grad=sup_gradient(proj, n_grid),
                            sup_lap=sup_laplacian(proj, n_grid)))
    f_l2 = math.sqrt(max(inner_product(basis, f, f, tol=tol), 0.0))
    return ScanTable(basis=basis, rows=rows, f_l2=f_l2)


def chain_inequality_holds(table: ScanTable, variant: str = "closed",
                           K_minus: float = 0.0, a0: float = 0.0,
                           phi_sup: float = 1.0,
                           k_phi_minus: float = 0.0) -> List[bool]:
    """Row-by-row check of the proof-route inequality with delta = lam.

    'closed' uses sqrt(2/pi) e^{K^-} (lam sup_u + sup_lap / lam); the
    'dirichlet' and 'neumann' variants use the corresponding C^2-bound
    constants.
    """
    out = []
    for r in table.rows:
        if r.n_modes == 0:
            out.append(True)
            continue
        lam = r.lam
        if variant == "closed":
            rhs = bounds.SQRT_2_OVER_PI * math.exp(K_minus) * (
                lam * r.sup_u + r.sup_lap / lam)
        elif variant == "dirichlet":
            rhs = bounds.c2_dirichlet_bound(K_minus, a0, lam,
                                            r.sup_u, r.sup_lap).value
        elif variant == "neumann":
            rhs = bounds.c2_neumann_bound(k_phi_minus, phi_sup, lam,
                                          r.sup_u, r.sup_lap).value
        else:
            raise ValueError(f"unknown variant {variant!r}")
        out.append(r.sup_grad <= rhs * (1.0 + 1e-12))
    return out
