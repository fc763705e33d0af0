import numpy as np
import pytest

from soliton_lab import catalog
from soliton_lab import geometry as geo
from soliton_lab import submanifold as sub
from soliton_lab.charts import Chart


def immersions():
    return [e for e in (catalog.resolve(t) for t in catalog.SUITE_TARGETS)
            if e.kind == "immersion"]


def cylinder():
    chart = Chart.box([("t", -3.0, 3.0), ("z", -2.0, 2.0)])
    return sub.Immersion(["cos(t)", "sin(t)", "z"], ["t", "z"], chart)


def test_plane_is_totally_geodesic():
    imm = catalog.make_plane(2, 3).immersion
    ex = sub.extrinsic_bundle(imm, imm.chart.sample(8))
    assert not ex.second_fundamental.any()
    assert not ex.mean_curvature.any()


@pytest.mark.parametrize("r", [1.0, 2.5])
def test_sphere_shape_operator_and_mean_curvature(r):
    imm = catalog.make_hypersphere(2, r).immersion
    p = imm.chart.sample(12)
    ex = sub.extrinsic_bundle(imm, p)
    np.testing.assert_allclose(ex.shape_operators[:, 0], -np.eye(2) / r * np.ones((12, 1, 1)),
                               atol=1e-12)
    np.testing.assert_allclose(ex.mean_curvature, -ex.position / r ** 2, atol=1e-12)
    # outward normal
    np.testing.assert_allclose(ex.normals[..., 0], ex.position / r, atol=1e-12)


def test_cylinder_principal_curvatures():
    imm = cylinder()
    rep = sub.principal_curvature_check(imm, [0.4, 0.3], lam=1.0)
    np.testing.assert_allclose(rep.kappas, [-1.0, 0.0], atol=1e-12)


def test_bundle_invariants():
    for e in immersions():
        imm = e.immersion
        p = e.sample(10)
        ex = sub.extrinsic_bundle(imm, p)
        J = imm.jacobian(p)
        # h is normal
        assert np.abs(np.einsum("bija,bak->bijk", ex.second_fundamental, J)).max() <= 1e-8
        # <h(X,Y), eta> = g(A_eta X, Y)
        hq = np.einsum("bija,bac->bcij", ex.second_fundamental, ex.normals)
        gA = np.einsum("bjk,bcki->bcij", ex.metric, ex.shape_operators)
        assert np.abs(hq - gA).max() <= 1e-8
        # H is the normalized trace of h
        H = np.einsum("bij,bija->ba", ex.inverse, ex.second_fundamental) / imm.dim
        np.testing.assert_allclose(ex.mean_curvature, H, atol=1e-12)
        # normals are orthonormal and normal
        N = ex.normals
        np.testing.assert_allclose(np.einsum("bac,bad->bcd", N, N),
                                   np.broadcast_to(np.eye(imm.codim), (10, imm.codim, imm.codim)),
                                   atol=1e-12)


@pytest.mark.parametrize("entry", immersions(), ids=lambda e: e.name)
def test_gauss_and_codazzi(entry, rng):
    imm = entry.immersion
    p = entry.sample(100, seed=11)
    X, Y, Z, W = rng.normal(size=(4, 100, imm.dim))
    assert sub.gauss_residual(imm, p, X, Y, Z, W).max() <= 1e-6
    q = p[:20]
    assert sub.codazzi_residual(imm, q, X[:20], Y[:20], Z[:20]).max() <= 1e-4


def test_flat_plane_structure_equations_exact():
    e = catalog.make_plane(2, 4)
    p = e.sample(5)
    v = np.ones((5, 2))
    assert sub.gauss_residual(e.immersion, p, v, v, v, v).max() == 0.0
    assert sub.codazzi_residual(e.immersion, p, v, v, v).max() == 0.0


def test_sphere_gauss_curvature_from_second_fundamental_form():
    imm = catalog.make_hypersphere(2, 2.0).immersion
    p = np.array([1.1, 0.4])
    metric = sub.InducedMetric(imm)
    e = geo.orthonormal_frame(metric.values(p[None]))[0]
    e1, e2 = e[:, 0], e[:, 1]
    ex = sub.extrinsic_bundle(imm, p[None], with_connection=False)
    h = ex.second_fundamental[0]
    hv = lambda X, Y: np.einsum("ija,i,j->a", h, X, Y)
    extrinsic = hv(e1, e1) @ hv(e2, e2) - hv(e1, e2) @ hv(e1, e2)
    intrinsic = geo.sectional_curvature(metric, p, e1, e2)
    assert extrinsic == pytest.approx(0.25, rel=1e-12)
    assert intrinsic == pytest.approx(0.25, rel=1e-12)


def test_split_on_sphere_is_radial():
    e = catalog.make_hypersphere(3, 1.5)
    s = sub.concurrent_split(e.immersion, e.sample(10))
    assert np.abs(s.tangential).max() < 1e-12
    np.testing.assert_allclose(s.normal, s.position, atol=1e-12)


def test_split_on_cone_is_tangent():
    e = catalog.make_cone_over_curve()
    s = sub.concurrent_split(e.immersion, e.sample(10))
    assert np.abs(s.normal).max() <= 1e-10
    np.testing.assert_allclose(s.tangential_ambient, s.position, atol=1e-12)


def test_split_on_hypercylinder():
    e = catalog.make_spherical_hypercylinder(2, 3)
    p = e.sample(10)
    s = sub.concurrent_split(e.immersion, p)
    np.testing.assert_allclose(np.linalg.norm(s.normal, axis=-1), 1.0, rtol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(s.tangential_ambient, axis=-1), np.abs(p[:, 2]),
                               atol=1e-12)
    np.testing.assert_allclose(s.tangential_ambient + s.normal, s.position, atol=1e-10)


@pytest.mark.parametrize("k,n", [(2, 3), (2, 4), (3, 4), (3, 5)])
def test_hypercylinder_criterion(k, n):
    e = catalog.make_spherical_hypercylinder(k, n)
    _, norm = sub.soliton_criterion_residual(e.immersion, e.sample(32), 1.0)
    assert norm.max() <= 1e-8


def test_sphere_product_criterion():
    e = catalog.make_product_of_spheres((2, 3), (1.0, np.sqrt(2.0)))
    _, norm = sub.soliton_criterion_residual(e.immersion, e.sample(16), 1.0)
    assert norm.max() <= 1e-8


@pytest.mark.parametrize("n,r", [(2, 1.0), (2, 3.0), (3, 0.7)])
def test_umbilical_sphere_criterion_and_fit(n, r):
    e = catalog.make_hypersphere(n, r)
    p = e.sample(16)
    lam = (n - 1) / r ** 2
    _, norm = sub.soliton_criterion_residual(e.immersion, p, lam)
    assert norm.max() <= 1e-8
    fit, resid = sub.fit_lambda(e.immersion, p)
    assert fit == pytest.approx(lam, abs=1e-10)
    assert resid.max() <= 1e-8


def test_tangential_derivative_identities():
    for name in ("plane?n=2&m=3", "hypercylinder?k=2&n=3", "hypersphere?n=2&r=1"):
        e = catalog.resolve(name)
        tang, norm = sub.tangential_derivative_check(e.immersion, e.sample(8))
        assert tang.max() <= 1e-6 and norm.max() <= 1e-6
    e = catalog.make_plane(2, 3)
    assert sub.tangential_derivative_check(e.immersion, [0.3, 0.2]) == (0.0, 0.0)


def test_principal_curvatures_of_sphere():
    e = catalog.make_hypersphere(3, 2.0)
    for rep in sub.principal_curvature_check(e.immersion, e.sample(6), lam=2 / 4):
        assert rep.max_residual <= 1e-8
        assert rep.matches and len(rep.clusters) == 1
        assert rep.alpha == pytest.approx(-0.5) and rep.rho == pytest.approx(2.0)


@pytest.mark.parametrize("k,n", [(2, 3), (2, 4), (3, 4)])
def test_principal_curvatures_of_hypercylinder(k, n):
    e = catalog.make_spherical_hypercylinder(k, n)
    for rep in sub.principal_curvature_check(e.immersion, e.sample(8), lam=1.0):
        c = n * rep.alpha + rep.rho
        assert rep.matches
        (v0, m0), (v1, m1) = rep.clusters
        assert (v0, m0) == (pytest.approx(c), k) and (v1, m1) == (pytest.approx(0, abs=1e-12), n - k)


def test_principal_curvatures_of_cone():
    e = catalog.make_cone_over_curve()
    for rep in sub.principal_curvature_check(e.immersion, e.sample(8), lam=1.0):
        assert rep.rho == pytest.approx(0.0, abs=1e-12)
        assert np.min(np.abs(rep.kappas)) <= 1e-12
        # n (1 - k) alpha = k rho with k = 1
        assert abs(rep.rho) <= 1e-12


def test_principal_curvatures_need_hypersurface():
    with pytest.raises(sub.ImmersionError):
        sub.principal_curvature_check(catalog.resolve("cone?n=2&m=4").immersion, [0.1, 1.0], 1.0)


def test_minimal_scalar_curvature():
    e = catalog.make_plane(3, 5)
    assert sub.minimal_scalar_check(e.immersion, e.sample(8), 1.0).max() <= 1e-10
    assert sub.minimal_scalar_check(e.immersion, e.sample(8)).max() <= 1e-10
    with pytest.raises(sub.NotMinimalError):
        sub.minimal_scalar_check(catalog.make_hypersphere(2).immersion, [1.0, 0.2])


def test_umbilicity():
    assert sub.umbilicity_check(catalog.make_hypersphere(2).immersion,
                                catalog.make_hypersphere(2).sample(8)).umbilical
    hc = catalog.make_spherical_hypercylinder(2, 3)
    assert not sub.umbilicity_check(hc.immersion, hc.sample(8)).umbilical
    cone = catalog.make_cone_over_curve()
    v = sub.umbilicity_check(cone.immersion, cone.sample(8))
    assert v.umbilical and np.abs(v.factors).max() <= 1e-10


@pytest.mark.parametrize("entry", immersions(), ids=lambda e: e.name)
def test_potential_function_gradients(entry):
    s = sub.concurrent_split(entry.immersion, entry.sample(32))
    assert np.abs(s.grad_psi + s.shape_vt).max() <= 1e-6
    assert np.abs(s.grad_phi - s.tangential).max() <= 1e-6


@pytest.mark.parametrize("entry", immersions(), ids=lambda e: e.name)
def test_ricci_from_second_fundamental_form(entry):
    p = entry.sample(16)
    ric = geo.curvature(entry.metric, p).ricci
    assert np.abs(ric - sub.gauss_ricci_form(entry.immersion, p)).max() <= 1e-6


def test_sphere_potential_is_constant():
    e = catalog.make_hypersphere(2, 1.7)
    phi = sub.concurrent_split(e.immersion, e.sample(64)).phi
    assert np.ptp(phi) <= 1e-9


def test_rank_deficiency_rejected():
    chart = Chart.box([("u", -1.0, 1.0), ("w", -1.0, 1.0)])
    imm = sub.Immersion(["u", "u", "u^2"], ["u", "w"], chart)
    with pytest.raises(sub.ImmersionError):
        sub.extrinsic_bundle(imm, [[0.2, 0.1]])


def test_normal_orientation_is_deterministic_and_continuous():
    e = catalog.make_hypersphere(2)
    p = e.sample(64)
    a = e.immersion.normal_frame(p)
    b = catalog.make_hypersphere(2).immersion.normal_frame(p[::-1])[::-1]
    np.testing.assert_array_equal(a, b)
    # outward everywhere on the chart
    assert (np.einsum("ba,ba->b", a[..., 0], e.immersion.position(p)) > 0).all()


def test_codimension_two_frames_are_orthonormal():
    e = catalog.resolve("cone?n=2&m=4")
    N = e.immersion.normal_frame(e.sample(16))
    np.testing.assert_allclose(np.einsum("bac,bad->bcd", N, N),
                               np.broadcast_to(np.eye(2), (16, 2, 2)), atol=1e-12)


def test_origin_offset_moves_the_concurrent_field():
    chart = Chart.box([("t1", 0.15, 2.99), ("t2", -3, 3)])
    comps = catalog.sphere_components(["t1", "t2"], 1.0)
    shifted = [f"{c} + 1" for c in comps]
    imm = sub.Immersion(shifted, ["t1", "t2"], chart, origin=[1.0, 1.0, 1.0])
    _, norm = sub.soliton_criterion_residual(imm, chart.sample(8), 1.0)
    assert norm.max() <= 1e-8
