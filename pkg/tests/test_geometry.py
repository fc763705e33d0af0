import numpy as np
import pytest

from soliton_lab import catalog, fdoracle
from soliton_lab import geometry as geo
from soliton_lab.charts import Chart

STEP = 1e-3
W = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
OFF = np.array([-2.0, -1.0, 1.0, 2.0])


def polar_metric():
    chart = Chart.box([("s", 0.5, 3.0), ("th", -3.0, 3.0)])
    return geo.ExprMetric.diagonal(["1", "s^2"], ["s", "th"], chart)


def sphere(r=1.0, k=2):
    return catalog.make_round_sphere(k, r)


def catalog_metrics():
    return [catalog.resolve(t) for t in catalog.SUITE_TARGETS]


def test_flat_christoffels_vanish():
    e = catalog.make_euclidean(3)
    p = e.sample(10)
    assert not geo.christoffel(e.metric, p).any()
    c = geo.curvature(e.metric, p)
    assert not c.riemann.any() and not c.ricci.any() and not c.scalar.any()


def test_polar_christoffels_by_hand():
    gam = geo.christoffel(polar_metric(), [2.0, 0.3])
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -2.0
    expected[1, 0, 1] = expected[1, 1, 0] = 0.5
    np.testing.assert_allclose(gam, expected, atol=1e-14)


def test_sphere_christoffels_against_differences():
    e = sphere(1.7)
    p = e.sample(20, seed=3)
    np.testing.assert_allclose(geo.christoffel(e.metric, p), fdoracle.christoffel(e.metric, p),
                               atol=1e-6)


@pytest.mark.parametrize("k,r", [(2, 1.0), (2, 2.0), (3, 1.5), (4, 0.8)])
def test_round_sphere_ricci(k, r):
    e = sphere(r, k)
    p = e.sample(50, seed=k)
    c = geo.curvature(e.metric, p)
    np.testing.assert_allclose(c.ricci, (k - 1) / r ** 2 * c.metric, atol=1e-10)
    # frame-sum scalar curvature: sum of sectional curvatures over i < j
    np.testing.assert_allclose(c.scalar, k * (k - 1) / 2 / r ** 2, rtol=1e-10)


def test_unit_sphere_has_positive_curvature():
    e = sphere(1.0)
    assert geo.sectional_curvature(e.metric, [1.0, 0.5], [1, 0], [0, 1]) == pytest.approx(1.0)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_sphere_sectional_any_plane(r, rng):
    e = sphere(r)
    p = e.sample(10, seed=1)
    X, Y = rng.normal(size=(2, 10, 2))
    np.testing.assert_allclose(geo.sectional_curvature(e.metric, p, X, Y), 1 / r ** 2, rtol=1e-10)


def test_degenerate_plane_rejected():
    e = sphere()
    with pytest.raises(geo.DegeneratePlaneError):
        geo.sectional_curvature(e.metric, [1.0, 0.5], [1, 2], [2, 4])


def test_cone_is_ricci_flat():
    e = catalog.make_warped_product("s", catalog.make_round_sphere(2))
    c = geo.curvature(e.metric, e.sample(30))
    assert np.abs(c.ricci).max() < 1e-12


def test_radial_sectional_vanishes_on_cone(rng):
    e = catalog.make_warped_product("s", catalog.make_round_sphere(2))
    p = e.sample(20)
    X = rng.normal(size=(20, 3))
    X[:, 0] = 0.0     # orthogonal to s d/ds
    v = np.zeros((20, 3))
    v[:, 0] = p[:, 0]
    assert np.abs(geo.sectional_curvature(e.metric, p, X, v)).max() < 1e-12


def test_radial_sectional_of_parabolic_warping(rng):
    # K(X, d/ds) = -f''/f = -2/s^2 for f = s^2
    e = catalog.make_warped_product("s^2", catalog.make_round_sphere(2))
    p = e.sample(20)
    X = rng.normal(size=(20, 3))
    X[:, 0] = 0.0
    v = np.zeros((20, 3))
    v[:, 0] = 1.0
    np.testing.assert_allclose(geo.sectional_curvature(e.metric, p, X, v), -2 / p[:, 0] ** 2,
                               rtol=1e-10)


def test_position_field_is_concurrent(rng):
    e = catalog.make_euclidean(3)
    p = e.sample(5)
    Z = rng.normal(size=(5, 3))
    np.testing.assert_allclose(geo.covariant_derivative(e.metric, p, e.potential, Z), Z)


def test_radial_field_is_concurrent_on_warped_cone(rng):
    e = catalog.make_warped_product("s", catalog.make_round_sphere(2))
    p = e.sample(5)
    Z = rng.normal(size=(5, 3))
    np.testing.assert_allclose(geo.covariant_derivative(e.metric, p, e.potential, Z), Z,
                               atol=1e-13)


def test_zero_field_has_zero_derivative():
    e = sphere()
    zero = geo.ExprVectorField(["0", "0"], e.chart.names)
    assert not geo.covariant_derivative(e.metric, e.sample(4), zero, [1.0, 2.0]).any()


def test_lie_derivative_of_concurrent_fields():
    e = catalog.make_euclidean(2)
    p = e.sample(5)
    np.testing.assert_allclose(geo.lie_derivative_metric(e.metric, p, e.potential),
                               2 * e.metric.values(p))
    cone = catalog.make_warped_product("s", catalog.make_round_sphere(2))
    p = cone.sample(50)
    np.testing.assert_allclose(geo.lie_derivative_metric(cone.metric, p, cone.potential),
                               2 * cone.metric.values(p), atol=1e-12)


def test_killing_field_on_sphere():
    e = sphere(1.3)
    rot = geo.ExprVectorField(["0", "1"], e.chart.names)
    assert np.abs(geo.lie_derivative_metric(e.metric, e.sample(10), rot)).max() < 1e-14


def test_gradients():
    e = catalog.make_euclidean(3)
    p = e.sample(5)
    np.testing.assert_allclose(geo.gradient(e.metric, p, "(x1^2 + x2^2 + x3^2)/2"), p)
    assert not geo.gradient(e.metric, p, "7").any()
    cone = catalog.make_warped_product("s", catalog.make_round_sphere(2))
    p = cone.sample(5)
    g = geo.gradient(cone.metric, p, "s^2/2")
    np.testing.assert_allclose(g, np.column_stack([p[:, 0], np.zeros((5, 2))]), atol=1e-14)


def test_singular_metric_rejected():
    chart = Chart.box([("u", -1, 1), ("w", -1, 1)])
    m = geo.ExprMetric([["1", "1"], ["1", "1"]], ["u", "w"], chart)
    with pytest.raises(geo.MetricError):
        geo.christoffel(m, [0.0, 0.0])
    m = geo.ExprMetric.diagonal(["1", "1e-14"], ["u", "w"], chart)
    with pytest.raises(geo.MetricError):
        geo.curvature(m, [0.0, 0.0])


def test_asymmetric_components_rejected():
    with pytest.raises(ValueError):
        geo.ExprMetric([["1", "u"], ["0", "1"]], ["u", "w"])


def test_orthonormal_frame():
    g = sphere(2.0).metric.values([[1.0, 0.3]])
    F = geo.orthonormal_frame(g)[0]
    np.testing.assert_allclose(F.T @ g[0] @ F, np.eye(2), atol=1e-14)
    assert F[1, 0] == 0.0        # first vector is along d_1


@pytest.mark.parametrize("entry", catalog_metrics(), ids=lambda e: e.name)
def test_curvature_symmetries(entry):
    c = geo.curvature(entry.metric, entry.sample(16))
    R = c.riemann_down
    np.testing.assert_allclose(c.christoffel, np.swapaxes(c.christoffel, -1, -2), atol=1e-12)
    assert np.abs(R + np.swapaxes(R, 1, 2)).max() <= 1e-8
    assert np.abs(R + np.swapaxes(R, 3, 4)).max() <= 1e-8
    assert np.abs(R - np.einsum("bijkl->bklij", R)).max() <= 1e-8
    bianchi = R + np.einsum("bjkil->bijkl", R) + np.einsum("bkijl->bijkl", R)
    assert np.abs(bianchi).max() <= 1e-8
    np.testing.assert_allclose(c.ricci, np.swapaxes(c.ricci, -1, -2), atol=1e-10)


@pytest.mark.parametrize("entry", catalog_metrics(), ids=lambda e: e.name)
def test_metric_compatibility(entry):
    con = geo.connection(entry.metric, entry.sample(16))
    lowered = np.einsum("bmki,bmj->bkij", con.christoffel, con.g)
    resid = con.dg - lowered - np.swapaxes(lowered, -1, -2)
    assert np.abs(resid).max() <= 1e-8


@pytest.mark.parametrize("entry", catalog_metrics(), ids=lambda e: e.name)
def test_jets_agree_with_finite_difference_pipeline(entry):
    p = entry.sample(6, seed=5)
    c = geo.curvature(entry.metric, p)
    assert fdoracle.relative_error(fdoracle.christoffel(entry.metric, p), c.christoffel) <= 1e-5
    assert fdoracle.relative_error(fdoracle.riemann(entry.metric, p), c.riemann) <= 1e-5


def _second_bianchi(metric, p):
    """Cyclic sum over (m, i, j) of nabla_m R^l_ijk, one FD layer."""
    c = geo.curvature(metric, p)
    gam, R = c.christoffel, c.riemann
    n = p.shape[-1]
    dR = np.zeros((p.shape[0], n) + R.shape[1:])
    for m in range(n):
        for w, o in zip(W, OFF):
            q = p.copy()
            q[:, m] += o * STEP
            dR[:, m] += w * geo.curvature(metric, q).riemann / STEP
    nabla = (dR + np.einsum("blmp,bpijk->bmlijk", gam, R)
             - np.einsum("bpmi,blpjk->bmlijk", gam, R)
             - np.einsum("bpmj,blipk->bmlijk", gam, R)
             - np.einsum("bpmk,blijp->bmlijk", gam, R))
    cyc = (nabla + np.einsum("biljmk->bmlijk", nabla)
           + np.einsum("bjlmik->bmlijk", nabla))
    return np.abs(cyc).max()


@pytest.mark.parametrize("entry", catalog_metrics(), ids=lambda e: e.name)
def test_second_bianchi_identity(entry):
    assert _second_bianchi(entry.metric, entry.sample(4, seed=2)) <= 1e-4
