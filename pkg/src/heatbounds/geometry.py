"""Exact geometry of a closed catalogue of model manifolds.

Six families are supported: Euclidean space, round spheres (embedded in
R^{d+1}), hyperbolic space of curvature -a^2 (upper half-space chart),
half-spaces {x_1 >= 0}, balls, and intervals [0, L].  Restricting to these
models keeps every hypothesis of the bound engine exactly computable:
Ricci lower bounds, boundary distance/normal, second fundamental form and
collar radii are all closed-form.

Conventions
-----------
* Points and tangent vectors are numpy arrays whose last axis carries the
  chart/embedding coordinates; all operations broadcast over leading axes.
* The inward unit normal N defines the boundary shape operator through
  II(X, Y) = -<grad_X N, Y>, so a ball of radius r has II = +1/r and mean
  curvature H = (d-1)/r.
* A drift field Z enters the operator as L = Laplacian + Z; the modified
  Ricci tensor is Ric^Z = Ric - <grad Z, .>.  For gradient drifts Z = grad V
  this is Ric - Hess V.
* Tangency / point-validity tolerance is 1e-12, with renormalization after
  every exponential step so long paths stay on the manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple, Union

import numpy as np

POINT_TOL = 1e-12


class UnsupportedModelError(ValueError):
    """Raised for drift/model pairings outside the closed catalogue."""


# ---------------------------------------------------------------------------
# drift specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroDrift:
    """Z = 0."""

    sup_norm: float = 0.0


@dataclass(frozen=True)
class ConstantDrift:
    """Constant vector field; only meaningful on Euclidean space."""

    vector: Tuple[float, ...]

    @property
    def sup_norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class PotentialDrift:
    """Gradient drift Z = grad V given by closed forms.

    ``hess`` returns the (scalar) second derivative; gradient drifts are
    restricted to one-dimensional flat charts where the coordinate Hessian
    is the covariant one.  ``hess_max`` is sup over the model of the largest
    Hessian eigenvalue, so Ric^Z >= K_0 - hess_max; ``sup_norm`` may be inf,
    in which case the drift cannot feed the boundary theorems.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    hess_max: float


def ou_drift() -> PotentialDrift:
    """V(x) = -x^2/2, Z = -x (Ornstein-Uhlenbeck): Ric^Z = +1 on the line."""
    return PotentialDrift(
        name="ou",
        value=lambda x: -0.5 * x * x,
        grad=lambda x: -x,
        hess=lambda x: -np.ones_like(x),
        sup_norm=math.inf,
        hess_max=-1.0,
    )


def cosine_drift(c: float) -> PotentialDrift:
    """V(x) = c cos x, Z = -c sin x: bounded drift with Ric^Z >= -c."""
    return PotentialDrift(
        name=f"cos({c})",
        value=lambda x: c * np.cos(x),
        grad=lambda x: -c * np.sin(x),
        hess=lambda x: -c * np.cos(x),
        sup_norm=abs(c),
        hess_max=abs(c),
    )


Drift = Union[ZeroDrift, ConstantDrift, PotentialDrift]


# ---------------------------------------------------------------------------
# model catalogue
# ---------------------------------------------------------------------------

def _check_drift(model) -> None:
    drift = model.drift
    if isinstance(drift, ZeroDrift):
        return
    if isinstance(drift, ConstantDrift):
        if not isinstance(model, Euclidean):
            raise UnsupportedModelError("constant drift is Euclidean-only")
        if len(drift.vector) != model.dim:
            raise UnsupportedModelError("constant drift dimension mismatch")
        return
    if isinstance(drift, PotentialDrift):
        flat_1d = (isinstance(model, (Euclidean, HalfSpace)) and model.dim == 1) \
            or isinstance(model, Interval)
        if not flat_1d:
            raise UnsupportedModelError(
                "gradient drifts are supported on one-dimensional flat charts only")
        return
    raise UnsupportedModelError(f"unknown drift {drift!r}")


@dataclass(frozen=True)
class Euclidean:
    dim: int
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim >= 1 required")
        _check_drift(self)


@dataclass(frozen=True)
class Sphere:
    """Round sphere of radius r, embedded in R^{dim+1} as {|x| = r}."""

    dim: int
    radius: float = 1.0
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.dim < 1 or self.radius <= 0:
            raise ValueError("dim >= 1 and radius > 0 required")
        _check_drift(self)


@dataclass(frozen=True)
class Hyperbolic:
    """Hyperbolic space of curvature -a^2, upper half-space chart x_d > 0."""

    dim: int
    a: float = 1.0
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.dim < 1 or self.a <= 0:
            raise ValueError("dim >= 1 and a > 0 required")
        _check_drift(self)


@dataclass(frozen=True)
class HalfSpace:
    """{x in R^dim : x_1 >= 0}, inward normal +e_1."""

    dim: int
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim >= 1 required")
        _check_drift(self)


@dataclass(frozen=True)
class Ball:
    """Closed ball of radius r in R^dim."""

    dim: int
    radius: float = 1.0
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.dim < 1 or self.radius <= 0:
            raise ValueError("dim >= 1 and radius > 0 required")
        _check_drift(self)


@dataclass(frozen=True)
class Interval:
    """[0, L] with the flat metric."""

    length: float
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length > 0 required")
        _check_drift(self)


Model = Union[Euclidean, Sphere, Hyperbolic, HalfSpace, Ball, Interval]

_FLAT = (Euclidean, HalfSpace, Ball, Interval)


def dim(model: Model) -> int:
    """Intrinsic dimension."""
    return 1 if isinstance(model, Interval) else model.dim


def ambient_dim(model: Model) -> int:
    """Number of coordinates a point carries."""
    if isinstance(model, Sphere):
        return model.dim + 1
    return dim(model)


def has_boundary(model: Model) -> bool:
    return isinstance(model, (HalfSpace, Ball, Interval))


def is_valid_point(model: Model, x: np.ndarray, tol: float = POINT_TOL) -> bool:
    """Point-validity predicate of the model's chart/embedding."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != ambient_dim(model):
        return False
    if isinstance(model, Euclidean):
        return bool(np.all(np.isfinite(x)))
    if isinstance(model, Sphere):
        r = np.linalg.norm(x, axis=-1)
        return bool(np.all(np.abs(r - model.radius) <= tol * max(1.0, model.radius)))
    if isinstance(model, Hyperbolic):
        return bool(np.all(x[..., -1] > 0))
    if isinstance(model, HalfSpace):
        return bool(np.all(x[..., 0] >= -tol))
    if isinstance(model, Ball):
        return bool(np.all(np.linalg.norm(x, axis=-1) <= model.radius + tol))
    if isinstance(model, Interval):
        return bool(np.all((x[..., 0] >= -tol) & (x[..., 0] <= model.length + tol)))
    raise UnsupportedModelError(str(model))


def validate_point(model: Model, x: np.ndarray) -> None:
    if not is_valid_point(model, x):
        raise ValueError(f"invalid point for {type(model).__name__}: {x!r}")


# ---------------------------------------------------------------------------
# tangent vectors
# ---------------------------------------------------------------------------

@dataclass
class TangentVector:
    """A tangent vector with its base point; checks the tangency constraint."""

    point: np.ndarray
    vector: np.ndarray


def tangent(model: Model, x, v) -> TangentVector:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    validate_point(model, x)
    if isinstance(model, Sphere):
        err = abs(float(np.dot(x, v)))
        if err > POINT_TOL * max(1.0, float(np.linalg.norm(v)) * model.radius):
            raise ValueError(f"vector not tangent to sphere (|<x,v>|={err:g})")
    return TangentVector(point=x, vector=v)


def metric_inner(model: Model, x, u, v) -> np.ndarray:
    """Riemannian inner product <u, v> at x (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    raw = np.sum(u * v, axis=-1)
    if isinstance(model, Hyperbolic):
        return raw / (model.a * x[..., -1]) ** 2
    return raw


def metric_norm(model: Model, x, v) -> np.ndarray:
    return np.sqrt(metric_inner(model, x, v, v))


# ---------------------------------------------------------------------------
# exponential map, distance, transport
# ---------------------------------------------------------------------------

def exp_map(model: Model, x, w) -> np.ndarray:
    """Geodesic exponential exp_x(w); closed form for every catalogue model."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if isinstance(model, _FLAT):
        return x + w
    if isinstance(model, Sphere):
        r = model.radius
        nw = np.linalg.norm(w, axis=-1, keepdims=True)
        theta = nw / r
        small = nw < 1e-300
        direction = np.where(small, 0.0, w / np.where(small, 1.0, nw))
        y = np.cos(theta) * x + r * np.sin(theta) * direction
        # renormalize so repeated stepping cannot drift off the sphere
        y *= r / np.linalg.norm(y, axis=-1, keepdims=True)
        return y
    if isinstance(model, Hyperbolic):
        return _hyperbolic_exp(x, w)
    raise UnsupportedModelError(str(model))


def _hyperbolic_exp(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Upper half-space exponential (chart-level, curvature scale free).

    Rescaling the metric by a constant leaves geodesics and the chart
    expression of exp unchanged, so this single formula serves every a.
    """
    squeeze = np.asarray(x).ndim == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    w = np.broadcast_to(np.atleast_2d(np.asarray(w, dtype=float)), x.shape)
    pd = x[..., -1]
    wbar = w[..., :-1]
    wd = w[..., -1]
    nb = np.linalg.norm(wbar, axis=-1)
    ntot = np.linalg.norm(w, axis=-1)
    out = np.array(x, copy=True)

    vertical = nb <= 1e-14 * (ntot + 1e-300)
    gen = ~vertical

    # vertical geodesics: height scales exponentially in arclength
    out[vertical, -1] = pd[vertical] * np.exp(wd[vertical] / pd[vertical])

    if np.any(gen):
        p = pd[gen]
        wb = wbar[gen]
        wv = wd[gen]
        nwb = nb[gen]
        ebar = wb / nwb[:, None]
        c = p * wv / nwb                       # center offset along ebar
        R = np.hypot(c, p)
        theta0 = np.arctan2(p, -c)
        s = np.linalg.norm(w[gen], axis=-1) / p  # arclength in the standard metric
        t_half = np.tan(0.5 * theta0) * np.exp(-s)
        theta1 = 2.0 * np.arctan(t_half)
        xi1 = c + R * np.cos(theta1)
        out[gen, :-1] = x[gen, :-1] + xi1[:, None] * ebar
        out[gen, -1] = R * np.sin(theta1)

    return out[0] if squeeze else out


def geodesic_step(model: Model, x, v, dt: float) -> np.ndarray:
    """One spatial step exp_x(sqrt(dt) * v) of the diffusion discretization."""
    if dt <= 0:
        raise ValueError("dt > 0 required")
    return exp_map(model, x, math.sqrt(dt) * np.asarray(v, dtype=float))


def distance(model: Model, x, y) -> np.ndarray:
    """Geodesic distance, closed form per model."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(model, _FLAT):
        return np.linalg.norm(y - x, axis=-1)
    if isinstance(model, Sphere):
        r = model.radius
        cosang = np.clip(np.sum(x * y, axis=-1) / r**2, -1.0, 1.0)
        return r * np.arccos(cosang)
    if isinstance(model, Hyperbolic):
        d2 = np.sum((x - y) ** 2, axis=-1)
        arg = 1.0 + d2 / (2.0 * x[..., -1] * y[..., -1])
        return np.arccosh(np.maximum(arg, 1.0)) / model.a
    raise UnsupportedModelError(str(model))


def parallel_transport_step(model: Model, x, y, w) -> np.ndarray:
    """Parallel transport of w from x to y along the short geodesic."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if isinstance(model, _FLAT):
        return np.array(w, copy=True)
    if isinstance(model, Sphere):
        return _sphere_transport(x / model.radius, y / model.radius, w)
    if isinstance(model, Hyperbolic):
        return _hyperbolic_transport(x, y, w)
    raise UnsupportedModelError(str(model))


def _sphere_transport(p: np.ndarray, q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Exact transport along the great circle joining unit directions p, q."""
    dot = np.sum(p * q, axis=-1, keepdims=True)
    if np.any(dot <= -1.0 + 1e-12):
        raise ValueError("antipodal points: transport undefined")
    wq = np.sum(w * q, axis=-1, keepdims=True)
    return w - wq / (1.0 + dot) * (p + q)


def _hyperbolic_transport(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Closed-form transport in the half-space chart.

    Along vertical geodesics chart components scale with height; along
    semicircular ones the in-plane part is rotated with the unit
    tangent/normal frame while the orthogonal part again scales.
    """
    x2 = np.atleast_2d(x)
    y2 = np.broadcast_to(np.atleast_2d(y), x2.shape)
    w2 = np.broadcast_to(np.atleast_2d(w), x2.shape).copy()
    squeeze = np.asarray(x).ndim == 1

    xd = x2[..., -1]
    yd = y2[..., -1]
    diff = y2[..., :-1] - x2[..., :-1]
    m = np.linalg.norm(diff, axis=-1)
    out = np.empty_like(w2)

    scale = np.maximum(xd, yd)
    vertical = m <= 1e-14 * scale
    if np.any(vertical):
        ratio = (yd[vertical] / xd[vertical])[:, None]
        out[vertical] = w2[vertical] * ratio

    gen = ~vertical
    if np.any(gen):
        h0 = xd[gen]
        h1 = yd[gen]
        dv = diff[gen]
        mm = m[gen]
        ebar = dv / mm[:, None]
        c = (mm**2 + h1**2 - h0**2) / (2.0 * mm)
        R = np.hypot(c, h0)
        th0 = np.arctan2(h0, -c)
        th1 = np.arctan2(h1, mm - c)
        wb = w2[gen, :-1]
        wd = w2[gen, -1]
        wxi = np.sum(wb * ebar, axis=-1)
        wperp = wb - wxi[:, None] * ebar
        # coefficients on the unit tangent/normal frame of the semicircle
        alpha = (-wxi * np.sin(th0) + wd * np.cos(th0)) / h0
        beta = (wxi * np.cos(th0) + wd * np.sin(th0)) / h0
        wxi1 = h1 * (-alpha * np.sin(th1) + beta * np.cos(th1))
        wd1 = h1 * (alpha * np.cos(th1) + beta * np.sin(th1))
        ratio = (h1 / h0)[:, None]
        out[gen, :-1] = wxi1[:, None] * ebar + wperp * ratio
        out[gen, -1] = wd1
    return out[0] if squeeze else out


def orthonormal_frame(model: Model, x) -> np.ndarray:
    """An orthonormal basis of T_xM as rows, shape (d, ambient)."""
    x = np.asarray(x, dtype=float)
    d = dim(model)
    if isinstance(model, _FLAT):
        return np.eye(d)
    if isinstance(model, Hyperbolic):
        return model.a * x[-1] * np.eye(d)
    if isinstance(model, Sphere):
        n = x / np.linalg.norm(x)
        basis = []
        for i in range(model.dim + 1):
            e = np.zeros(model.dim + 1)
            e[i] = 1.0
            v = e - np.dot(e, n) * n
            for b in basis:
                v -= np.dot(v, b) * b
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                basis.append(v / nv)
            if len(basis) == d:
                break
        return np.array(basis)
    raise UnsupportedModelError(str(model))


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

@dataclass
class BoundaryData:
    distance: float
    normal: np.ndarray      # inward unit normal at the nearest boundary point
    inside: bool


def boundary_data(model: Model, x) -> BoundaryData:
    """Distance to the boundary, inward unit normal, and interior flag."""
    if not has_boundary(model):
        raise UnsupportedModelError(f"{type(model).__name__} has no boundary")
    x = np.asarray(x, dtype=float)
    if isinstance(model, HalfSpace):
        rho = float(x[0])
        n = np.zeros(model.dim)
        n[0] = 1.0
        return BoundaryData(rho, n, rho > 0)
    if isinstance(model, Ball):
        r = float(np.linalg.norm(x))
        if r < 1e-15:
            n = np.zeros(model.dim)
            n[0] = -1.0  # nearest boundary point is not unique at the center
            return BoundaryData(model.radius, n, True)
        return BoundaryData(model.radius - r, -x / r, r < model.radius)
    if isinstance(model, Interval):
        t = float(x[0])
        if t <= model.length - t:
            return BoundaryData(t, np.array([1.0]), 0 < t < model.length)
        return BoundaryData(model.length - t, np.array([-1.0]),
                            0 < t < model.length)
    raise UnsupportedModelError(str(model))


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def sectional_curvature(model: Model) -> float:
    """Constant sectional curvature of the model's interior."""
    if isinstance(model, Sphere):
        return 1.0 / model.radius**2
    if isinstance(model, Hyperbolic):
        return -model.a**2
    return 0.0


def ricci_scalar_factor(model: Model) -> float:
    """Ric = c * id on every catalogue model; returns c = (d-1) * sect."""
    return (dim(model) - 1) * sectional_curvature(model)


def drift_vector(model: Model, x) -> np.ndarray:
    """Z at x in chart/embedding coordinates."""
    x = np.asarray(x, dtype=float)
    drift = model.drift
    if isinstance(drift, ZeroDrift):
        return np.zeros_like(x)
    if isinstance(drift, ConstantDrift):
        v = np.asarray(drift.vector, dtype=float)
        return np.broadcast_to(v, x.shape).copy()
    if isinstance(drift, PotentialDrift):
        return drift.grad(x)
    raise UnsupportedModelError(str(drift))


def ricci_z_action(model: Model, x, w) -> np.ndarray:
    """Apply the endomorphism Ric^Z = Ric - grad Z to w at x (exactly).

    On the catalogue Ric is a constant multiple of the identity; gradient
    drifts (flat one-dimensional charts) contribute -Hess V.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    out = ricci_scalar_factor(model) * w
    drift = model.drift
    if isinstance(drift, PotentialDrift):
        out = out - drift.hess(x) * w
    return out


@dataclass(frozen=True)
class CurvatureBounds:
    """Constant pack consumed by the bound engine.

    ``theta_H`` bounds the boundary mean curvature from below and
    ``theta_II`` bounds II from above; they are independent fields (the
    convexity defect sigma satisfies II >= -sigma).  ``k`` is an upper
    sectional curvature bound on the collar of radius ``r0``; ``Z_collar``
    is the sup of |Z| there.
    """

    K_Z: float
    K_0: float
    theta_H: float
    sigma: float
    theta_II: float
    k: float
    r0: float
    Z_sup: float
    Z_collar: float


def curvature_bounds(model: Model) -> CurvatureBounds:
    """Exact curvature/boundary constants of a catalogue model."""
    d = dim(model)
    ric = ricci_scalar_factor(model)
    k = max(sectional_curvature(model), 0.0)

    theta_H = sigma = theta_II = r0 = 0.0
    if isinstance(model, HalfSpace):
        r0 = 1.0   # rho_boundary is globally smooth; any finite collar works
    elif isinstance(model, Ball):
        r0 = model.radius / 2.0     # keep the collar clear of the center
        if d >= 2:
            theta_II = 1.0 / model.radius
            theta_H = (d - 1) / model.radius
    elif isinstance(model, Interval):
        r0 = model.length / 2.0

    drift = model.drift
    if isinstance(drift, ZeroDrift):
        K_Z, z_sup = ric, 0.0
    elif isinstance(drift, ConstantDrift):
        K_Z, z_sup = ric, drift.sup_norm
    elif isinstance(drift, PotentialDrift):
        if not math.isfinite(drift.sup_norm):
            raise UnsupportedModelError(
                f"drift {drift.name!r} has unbounded norm on {type(model).__name__}; "
                "no finite constant pack exists")
        K_Z, z_sup = ric - drift.hess_max, drift.sup_norm
    else:
        raise UnsupportedModelError(str(drift))

    return CurvatureBounds(K_Z=K_Z, K_0=ric, theta_H=theta_H, sigma=sigma,
                           theta_II=theta_II, k=k, r0=r0,
                           Z_sup=z_sup, Z_collar=z_sup)


# ---------------------------------------------------------------------------
# named instances for the CLI / experiments
# ---------------------------------------------------------------------------

def model_catalogue() -> dict:
    return {
        "euclid1": Euclidean(1),
        "euclid2": Euclidean(2),
        "euclid1-ou": Euclidean(1, drift=ou_drift()),
        "sphere2": Sphere(2, 1.0),
        "hyper2": Hyperbolic(2, 1.0),
        "halfspace1": HalfSpace(1),
        "halfspace2": HalfSpace(2),
        "interval": Interval(math.pi),
        "ball2": Ball(2, 1.0),
    }
