import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soliton_lab import jets
from soliton_lab.jets import Jet3, JetDomainError, seed


def test_seed_definition():
    x = seed((2.0, 3.0), 0)
    assert x.value == 2.0
    np.testing.assert_array_equal(x.d1, [1.0, 0.0])
    assert not x.d2.any() and not x.d3.any()


def test_seed_rejects_bad_index():
    with pytest.raises(IndexError):
        seed((1.0, 2.0), 2)
    with pytest.raises(IndexError):
        seed((1.0,), -1)


def test_cube_at_half():
    x = seed((0.5,), 0)
    c = x * x * x
    assert (c.value, c.d1[0], c.d2[0, 0], c.d3[0, 0, 0]) == pytest.approx((0.125, 0.75, 3.0, 6.0))


def test_square_at_three():
    x = seed((3.0,), 0)
    y = x * x
    assert (y.value, y.d1[0], y.d2[0, 0], y.d3[0, 0, 0]) == pytest.approx((9, 6, 2, 0))


def test_sin_at_zero():
    y = jets.sin(seed((0.0,), 0))
    assert (y.value, y.d1[0], y.d2[0, 0], y.d3[0, 0, 0]) == pytest.approx((0, 1, 0, -1))


def test_sqrt_at_four():
    y = jets.sqrt(seed((4.0,), 0))
    assert (y.value, y.d1[0], y.d2[0, 0], y.d3[0, 0, 0]) == pytest.approx((2, 0.25, -1 / 32, 3 / 256))


def test_product_cos_against_differences():
    p = np.array([1.0, 0.7])
    s, t = seed(p, 0), seed(p, 1)
    y = s * jets.cos(t)
    f = lambda q: q[0] * np.cos(q[1])
    h = 1e-4
    fd = [(f(p + h * e) - f(p - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(y.d1, fd, atol=1e-6)
    # mixed second partial is -sin(t)
    assert y.d2[0, 1] == pytest.approx(-np.sin(0.7))


def test_storage_is_symmetric_by_construction():
    p = (0.3, -0.4, 0.9)
    x, y, z = jets.seed_all(p)
    w = jets.exp(x * y) * jets.sin(z - x) / (2 + jets.cos(y * z))
    d2, d3 = w.d2, w.d3
    np.testing.assert_array_equal(d2, d2.T)
    for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0)]:
        np.testing.assert_array_equal(d3, d3.transpose(perm))


def test_domain_errors_report_point():
    x = seed((0.0, 1.0), 0)
    with pytest.raises(JetDomainError) as info:
        1.0 / x
    assert info.value.point == (0.0, 1.0)
    with pytest.raises(JetDomainError):
        jets.sqrt(x)
    with pytest.raises(JetDomainError):
        jets.sqrt(-seed((2.0,), 0))


def test_negative_power_of_zero_is_domain_error():
    with pytest.raises(JetDomainError):
        seed((0.0,), 0) ** -2


def test_jets_are_immutable():
    x = seed((1.0,), 0)
    with pytest.raises(ValueError):
        x.data[0] = 5.0


def test_mismatched_dimensions():
    with pytest.raises(ValueError):
        seed((1.0,), 0) + seed((1.0, 2.0), 0)


def test_integer_power_matches_products():
    x = seed((1.3, 0.2), 0) + 2 * seed((1.3, 0.2), 1)
    np.testing.assert_allclose((x ** 3).data, (x * x * x).data, rtol=1e-13)
    np.testing.assert_allclose((x ** -2).data, (1 / (x * x)).data, rtol=1e-12)
    np.testing.assert_allclose((x ** 0).data, Jet3.constant(1.0, 2).data)


def _random_jet(draw, n=2):
    vals = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=jets.layout(n).width,
                         max_size=jets.layout(n).width))
    return Jet3(vals, n)


@st.composite
def jet_triples(draw):
    return _random_jet(draw), _random_jet(draw), _random_jet(draw)


@given(jet_triples())
@settings(max_examples=200)
def test_ring_axioms(abc):
    a, b, c = abc
    close = lambda u, v: np.testing.assert_allclose(u.data, v.data, rtol=1e-12, atol=1e-9)
    close(a + b, b + a)
    close(a * b, b * a)
    close((a + b) + c, a + (b + c))
    close((a * b) * c, a * (b * c))
    close(a * (b + c), a * b + a * c)
    close(a - a, Jet3.constant(0.0, 2))


@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=4))
def test_seed_then_value_is_identity(coords):
    for i, c in enumerate(coords):
        assert seed(coords, i).value == c
