import math

import numpy as np
import pytest

from heatbounds import geometry as geo


# ---------------------------------------------------------------------------
# curvature packs: spec'd constants plus a finite-difference curvature oracle
# ---------------------------------------------------------------------------

def test_pack_sphere():
    pack = geo.curvature_bounds(geo.Sphere(2, 1.0))
    assert pack.K_Z == 1.0 and pack.K_0 == 1.0


def test_pack_euclid1_trivial():
    pack = geo.curvature_bounds(geo.Euclidean(1))
    assert (pack.K_Z, pack.K_0, pack.theta_H, pack.sigma, pack.theta_II,
            pack.k, pack.Z_sup) == (0, 0, 0, 0, 0, 0, 0)


def test_pack_ball():
    pack = geo.curvature_bounds(geo.Ball(2, 1.0))
    assert pack.theta_H == 1.0 and pack.theta_II == 1.0 and pack.sigma == 0.0


def test_pack_hyperbolic():
    pack = geo.curvature_bounds(geo.Hyperbolic(3, 2.0))
    assert pack.K_Z == pytest.approx(-2 * 4.0)
    assert pack.k == 0.0


def test_pack_drift_adjustment():
    pack = geo.curvature_bounds(geo.Interval(math.pi, drift=geo.cosine_drift(0.5)))
    assert pack.K_Z == pytest.approx(-0.5)
    assert pack.Z_sup == pytest.approx(0.5)


def test_pack_unbounded_drift_rejected():
    with pytest.raises(geo.UnsupportedModelError):
        geo.curvature_bounds(geo.Euclidean(1, drift=geo.ou_drift()))


def _conformal_metric(kappa):
    # g_ij = delta_ij / (1 + kappa |u|^2 / 4)^2 has constant curvature kappa
    def g(u):
        c = 1.0 + kappa * np.dot(u, u) / 4.0
        return np.eye(len(u)) / c**2
    return g


def _numeric_ricci(g, u, h=1e-4):
    """Second-order finite-difference Ricci tensor of a chart metric."""
    d = len(u)

    def christoffel(p):
        G = np.array(g(p))
        Ginv = np.linalg.inv(G)
        dG = np.zeros((d, d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            dG[k] = (np.array(g(p + e)) - np.array(g(p - e))) / (2 * h)
        Gam = np.zeros((d, d, d))
        for a in range(d):
            for i in range(d):
                for j in range(d):
                    Gam[a, i, j] = 0.5 * sum(
                        Ginv[a, b] * (dG[i][j, b] + dG[j][i, b] - dG[b][i, j])
                        for b in range(d))
        return Gam

    Gam0 = christoffel(u)
    dGam = np.zeros((d, d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dGam[k] = (christoffel(u + e) - christoffel(u - e)) / (2 * h)
    ric = np.zeros((d, d))
    for j in range(d):
        for k in range(d):
            val = 0.0
            for i in range(d):
                val += dGam[i][i, j, k] - dGam[j][i, i, k]
                for m in range(d):
                    val += Gam0[i, i, m] * Gam0[m, j, k] \
                        - Gam0[i, j, m] * Gam0[m, i, k]
            ric[j, k] = val
    return ric


@pytest.mark.parametrize("model", [
    geo.Sphere(2, 1.0), geo.Sphere(2, 2.0), geo.Sphere(3, 1.0),
    geo.Hyperbolic(2, 1.0), geo.Hyperbolic(3, 0.5), geo.Euclidean(2),
])
def test_curvature_oracle_finite_differences(model):
    # Ric == (d-1) * kappa * g, checked against FD curvature of the chart
    d = geo.dim(model)
    kappa = geo.sectional_curvature(model)
    g = _conformal_metric(kappa)
    rng = np.random.default_rng(3)
    for _ in range(3):
        u = rng.uniform(-0.4, 0.4, size=d)
        ric = _numeric_ricci(g, u)
        expected = (d - 1) * kappa * np.array(g(u))
        assert np.max(np.abs(ric - expected)) < 1e-4


def test_ball_second_fundamental_form_oracle():
    # II(X, X) = -<grad_X N, X> with N = -x/|x| extended off the boundary
    r = 1.3
    p = np.array([r, 0.0])
    X = np.array([0.0, 1.0])
    eps = 1e-6

    def N(y):
        return -y / np.linalg.norm(y)

    dN = (N(p + eps * X) - N(p - eps * X)) / (2 * eps)
    ii = -np.dot(dN, X)
    assert ii == pytest.approx(1.0 / r, abs=1e-8)
    pack = geo.curvature_bounds(geo.Ball(2, r))
    assert pack.theta_II == pytest.approx(ii, abs=1e-8)


# ---------------------------------------------------------------------------
# exponential map and distance
# ---------------------------------------------------------------------------

def test_geodesic_step_euclidean():
    y = geo.geodesic_step(geo.Euclidean(2), np.zeros(2), np.array([1.0, 2.0]),
                          0.25)
    assert np.allclose(y, [0.5, 1.0])


def test_geodesic_step_sphere_antipode():
    y = geo.geodesic_step(geo.Sphere(2, 1.0), np.array([0.0, 0.0, 1.0]),
                          np.array([math.pi, 0.0, 0.0]), 1.0)
    assert np.allclose(y, [0.0, 0.0, -1.0], atol=1e-12)


def test_geodesic_step_zero_vector():
    x = np.array([0.0, 0.0, 1.0])
    y = geo.geodesic_step(geo.Sphere(2, 1.0), x, np.zeros(3), 1.0)
    assert np.allclose(y, x)


@pytest.mark.parametrize("model,point", [
    (geo.Euclidean(2), np.array([0.3, -0.2])),
    (geo.Sphere(2, 1.0), np.array([0.0, 0.0, 1.0])),
    (geo.Sphere(2, 2.5), np.array([0.0, 0.0, 2.5])),
    (geo.Hyperbolic(2, 1.0), np.array([0.4, 1.7])),
    (geo.Hyperbolic(3, 2.0), np.array([0.1, -0.3, 0.8])),
])
def test_exp_map_distance_property(model, point):
    rng = np.random.default_rng(11)
    frame = geo.orthonormal_frame(model, point)
    for t in (0.01, 0.05, 0.1):
        v = rng.normal(size=frame.shape[0]) @ frame
        y = geo.exp_map(model, point, t * v)
        dist = float(geo.distance(model, point, y))
        assert dist == pytest.approx(t * float(geo.metric_norm(model, point, v)),
                                     abs=1e-8)


def test_point_validity_after_many_steps():
    model = geo.Sphere(2, 1.0)
    rng = np.random.default_rng(5)
    x = np.array([1.0, 0.0, 0.0])
    for _ in range(2000):
        f = geo.orthonormal_frame(model, x)
        x = geo.exp_map(model, x, 0.03 * rng.normal(size=2) @ f)
    assert geo.is_valid_point(model, x)


# ---------------------------------------------------------------------------
# parallel transport
# ---------------------------------------------------------------------------

def test_transport_euclidean_identity():
    w = np.array([1.0, 2.0])
    out = geo.parallel_transport_step(geo.Euclidean(2), np.zeros(2),
                                      np.ones(2), w)
    assert np.array_equal(out, w)


def test_transport_sphere_quarter_circle():
    m = geo.Sphere(2, 1.0)
    p = np.array([1.0, 0.0, 0.0])
    q = np.array([0.0, 1.0, 0.0])
    w = np.array([0.0, 1.0, 0.0])   # tangent at p, along the circle
    out = geo.parallel_transport_step(m, p, q, w)
    assert np.allclose(out, [-1.0, 0.0, 0.0], atol=1e-12)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_transport_same_point_identity():
    m = geo.Sphere(2, 1.0)
    p = np.array([0.0, 0.0, 1.0])
    w = np.array([0.3, -0.2, 0.0])
    assert np.allclose(geo.parallel_transport_step(m, p, p, w), w)


def test_transport_antipodal_raises():
    m = geo.Sphere(2, 1.0)
    with pytest.raises(ValueError):
        geo.parallel_transport_step(m, np.array([0.0, 0.0, 1.0]),
                                    np.array([0.0, 0.0, -1.0]),
                                    np.array([1.0, 0.0, 0.0]))


@pytest.mark.parametrize("model,start", [
    (geo.Sphere(2, 1.0), [0.0, 0.0, 1.0]),
    (geo.Sphere(3, 1.5), [0.0, 0.0, 0.0, 1.5]),
    (geo.Hyperbolic(2, 1.0), [0.0, 1.0]),
    (geo.Hyperbolic(2, 2.0), [0.5, 0.7]),
])
def test_transport_preserves_inner_products_long_path(model, start):
    # norms and inner products drift less than 1e-10 over 1e4 steps
    rng = np.random.default_rng(17)
    x = np.asarray(start, dtype=float)
    f = geo.orthonormal_frame(model, x)
    v = f[0].copy()
    w = (f[0] + f[1]) / math.sqrt(2.0) if f.shape[0] > 1 else f[0].copy()
    n_v0 = float(geo.metric_norm(model, x, v))
    ip0 = float(geo.metric_inner(model, x, v, w))
    for _ in range(10_000):
        step = 0.01 * rng.normal(size=f.shape[0]) @ f
        y = geo.exp_map(model, x, step)
        v = geo.parallel_transport_step(model, x, y, v)
        w = geo.parallel_transport_step(model, x, y, w)
        f = np.array([geo.parallel_transport_step(model, x, y, fi) for fi in f])
        x = y
    assert float(geo.metric_norm(model, x, v)) == pytest.approx(n_v0, abs=1e-10)
    assert float(geo.metric_inner(model, x, v, w)) == pytest.approx(ip0, abs=1e-10)


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

def test_boundary_halfspace():
    bd = geo.boundary_data(geo.HalfSpace(2), np.array([0.3, 7.0]))
    assert bd.distance == pytest.approx(0.3)
    assert np.allclose(bd.normal, [1.0, 0.0])
    assert bd.inside


def test_boundary_ball_center():
    bd = geo.boundary_data(geo.Ball(2, 1.0), np.zeros(2))
    assert bd.distance == pytest.approx(1.0)


def test_boundary_interval():
    bd = geo.boundary_data(geo.Interval(math.pi), np.array([2.9]))
    assert bd.distance == pytest.approx(math.pi - 2.9)
    assert bd.normal[0] == -1.0


def test_boundaryless_raises():
    with pytest.raises(geo.UnsupportedModelError):
        geo.boundary_data(geo.Sphere(2, 1.0), np.array([0.0, 0.0, 1.0]))


@pytest.mark.parametrize("model,x", [
    (geo.HalfSpace(2), np.array([0.4, 1.0])),
    (geo.Interval(math.pi), np.array([0.7])),
    (geo.Ball(2, 1.0), np.array([0.3, 0.1])),
])
def test_boundary_distance_along_normal(model, x):
    bd = geo.boundary_data(model, x)
    eps = 1e-4
    bd2 = geo.boundary_data(model, x + eps * bd.normal)
    # exact on flat-normal models; O(eps^2) on the ball
    tol = 1e-12 if not isinstance(model, geo.Ball) else 2 * eps**2
    assert bd2.distance - bd.distance == pytest.approx(eps, abs=tol)


# ---------------------------------------------------------------------------
# Ric^Z action and tangent vectors
# ---------------------------------------------------------------------------

def test_ricci_action_sphere():
    w = np.array([0.0, 2.0, 0.0])
    out = geo.ricci_z_action(geo.Sphere(2, 1.0), np.array([1.0, 0.0, 0.0]), w)
    assert np.allclose(out, w)


def test_ricci_action_euclid_zero():
    out = geo.ricci_z_action(geo.Euclidean(2), np.zeros(2), np.array([1.0, 0.0]))
    assert np.allclose(out, 0.0)


def test_ricci_action_ou():
    m = geo.Euclidean(1, drift=geo.ou_drift())
    out = geo.ricci_z_action(m, np.array([0.3]), np.array([1.0]))
    assert np.allclose(out, [1.0])


def test_tangent_validation_sphere():
    m = geo.Sphere(2, 1.0)
    x = np.array([0.0, 0.0, 1.0])
    geo.tangent(m, x, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        geo.tangent(m, x, np.array([0.0, 0.0, 1.0]))


def test_invalid_point_rejected():
    assert not geo.is_valid_point(geo.Sphere(2, 1.0), np.array([0.0, 0.0, 1.1]))
    assert not geo.is_valid_point(geo.Hyperbolic(2, 1.0), np.array([0.0, -1.0]))
    with pytest.raises(ValueError):
        geo.validate_point(geo.Interval(1.0), np.array([2.0]))


def test_drift_pairing_rules():
    with pytest.raises(geo.UnsupportedModelError):
        geo.Sphere(2, 1.0, drift=geo.ConstantDrift((1.0, 0.0, 0.0)))
    with pytest.raises(geo.UnsupportedModelError):
        geo.Euclidean(2, drift=geo.ou_drift())   # 1-d charts only
    geo.Euclidean(2, drift=geo.ConstantDrift((1.0, 0.0)))
