import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aimvolcano.series import (EnergyPoly, Jet, JetMismatchError, OrderExhaustedError,
                               ScalarJet, SingularDivisionError, jet_derivative, jet_div,
                               jet_mul, scalar_jet_asinh, scalar_jet_exp)

# magnitudes below 1e-6 are replaced by 0 so products never underflow
finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False).map(
    lambda v: v if abs(v) > 1e-6 else 0.0)
cplx = st.builds(complex, finite, finite)


def poly(*c):
    return EnergyPoly.from_list(c)


def scalar_jet(coeffs, u0=0.0):
    return Jet(u0, np.array(coeffs, dtype=complex).reshape(-1, 1))


@st.composite
def jets(draw, order=5, width=3, invertible=False):
    data = np.array(draw(st.lists(cplx, min_size=(order + 1) * width,
                                  max_size=(order + 1) * width)), dtype=complex)
    data = data.reshape(order + 1, width)
    if invertible:
        data[0, 1:] = 0
        lead = draw(cplx)
        data[0, 0] = lead if abs(lead) > 0.5 else 1.0 + lead
    return Jet(0.3, data)


@st.composite
def scalar_jets(draw, order=6):
    return ScalarJet(0.0, np.array(draw(st.lists(cplx, min_size=order + 1,
                                                 max_size=order + 1))))


@st.composite
def small_polys(draw):
    return EnergyPoly.from_list(draw(st.lists(cplx, min_size=0, max_size=5)))


def close(a, b, rtol=1e-12):
    scale = max(np.abs(a).max(initial=0), np.abs(b).max(initial=0), 1.0)
    return np.abs(np.asarray(a) - np.asarray(b)).max(initial=0) <= rtol * scale


def padded(j: Jet, width: int) -> np.ndarray:
    out = np.zeros((j.data.shape[0], width), dtype=complex)
    out[:, : j.data.shape[1]] = j.data
    return out


# -- EnergyPoly ---------------------------------------------------------------

def test_difference_of_squares():
    assert poly(1, 1) * poly(-1, 1) == poly(-1, 0, 1)


def test_additive_identity():
    p = poly(1, 2, 3)
    assert p + EnergyPoly.zero() == p


def test_monomial_product():
    assert poly(0, 2) * poly(0, 0, 3) == poly(0, 0, 0, 6)


def test_eval():
    p = poly(-1, 0, 1)
    assert p(1) == 0
    assert p(2) == 3
    assert EnergyPoly.zero()(1.7 + 2j) == 0


def test_canonical_trim_and_degree():
    p = poly(1, 2, 0, 0)
    assert p.degree == 1
    assert EnergyPoly.zero().degree == -1
    assert (poly(1, 1) - poly(1, 1)).is_zero()


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        poly(1, float("nan"))


@settings(max_examples=200, deadline=None)
@given(small_polys(), small_polys(), small_polys())
def test_ring_axioms(p, q, r):
    assert ((p * q) * r).allclose(p * (q * r), rtol=1e-13, atol=1e-13)
    assert (p * (q + r)).allclose(p * q + p * r, rtol=1e-13, atol=1e-13)
    assert (p + q).allclose(q + p)


@settings(max_examples=200, deadline=None)
@given(small_polys(), small_polys())
def test_degree_of_product(p, q):
    if p.is_zero() or q.is_zero():
        assert (p * q).is_zero()
    else:
        assert (p * q).degree == p.degree + q.degree


# -- Jet arithmetic -------------------------------------------------------------

def test_mul_one_plus_t_one_minus_t():
    f = scalar_jet([1, 1, 0])
    g = scalar_jet([1, -1, 0])
    assert np.allclose(jet_mul(f, g).data[:, 0], [1, 0, -1])


def test_mul_identity():
    f = Jet(0.0, np.arange(6, dtype=complex).reshape(3, 2))
    one = Jet.constant(poly(1), 0.0, 2)
    assert np.allclose(jet_mul(f, one).data, f.data)


def test_mul_truncation_drops_square():
    t = scalar_jet([0, 1])
    assert np.allclose(jet_mul(t, t).data[:, 0], [0, 0])


def test_mul_mismatch():
    with pytest.raises(JetMismatchError):
        jet_mul(scalar_jet([1, 2], 0.0), scalar_jet([1, 2], 1.0))
    with pytest.raises(JetMismatchError):
        jet_mul(scalar_jet([1, 2]), scalar_jet([1, 2, 3]))


def test_div_geometric_series():
    one = scalar_jet([1, 0, 0, 0, 0])
    g = scalar_jet([1, 0, 1, 0, 0])
    assert np.allclose(jet_div(one, g).data[:, 0], [1, 0, -1, 0, 1])


def test_div_self():
    g = scalar_jet([2, 1, 3, -1])
    assert np.allclose(jet_div(g, g).data[:, 0], [1, 0, 0, 0])


def test_div_singular():
    with pytest.raises(SingularDivisionError):
        jet_div(scalar_jet([1, 1]), scalar_jet([0, 1]))
    e_lead = Jet(0.0, np.array([[1, 1], [0, 0]], dtype=complex))
    with pytest.raises(SingularDivisionError):
        jet_div(scalar_jet([1, 1]), e_lead)


def test_derivative_term_by_term():
    d = jet_derivative(scalar_jet([5, 7, 11])).data[:, 0]
    assert np.allclose(d, [7, 22])


def test_derivative_of_constant():
    d = jet_derivative(Jet.constant(poly(3, 1), 0.0, 4))
    assert d.order == 3
    assert np.all(d.data == 0)


def test_derivative_of_sinh_is_cosh():
    sinh = [0, 1, 0, 1 / 6, 0, 1 / 120]
    d = jet_derivative(scalar_jet(sinh)).data[:, 0]
    assert np.allclose(d, [1, 0, 0.5, 0, 1 / 24])


def test_derivative_order_exhausted():
    with pytest.raises(OrderExhaustedError):
        jet_derivative(scalar_jet([1.0]))


@settings(max_examples=1000, deadline=None)
@given(jets(), jets())
def test_leibniz(f, g):
    lhs = jet_derivative(jet_mul(f, g))
    n = lhs.order
    rhs = (jet_mul(jet_derivative(f), g.truncate(n))
           + jet_mul(f.truncate(n), jet_derivative(g)))
    w = max(lhs.data.shape[1], rhs.data.shape[1])
    assert close(padded(lhs, w), padded(rhs, w), 1e-12)


@settings(max_examples=1000, deadline=None)
@given(jets(), jets(invertible=True))
def test_division_round_trip(f, g):
    back = jet_mul(g, jet_div(f, g))
    w = max(back.data.shape[1], f.data.shape[1])
    a, b = padded(back, w), padded(f, w)
    # relative to the largest intermediate magnitude, per the round-trip contract
    scale = max(np.abs(jet_div(f, g).data).max() * np.abs(g.data).max(), np.abs(f.data).max(), 1)
    assert np.abs(a - b).max() <= 1e-12 * scale


@settings(max_examples=300, deadline=None)
@given(jets(width=2), jets(width=3))
def test_degree_bookkeeping(f, g):
    deg = jet_mul(f, g).energy_degree
    if f.energy_degree < 0 or g.energy_degree < 0:
        assert deg == -1
    else:
        assert deg <= f.energy_degree + g.energy_degree


# -- transcendental scalar jets ---------------------------------------------------

def test_exp_of_zero():
    e = scalar_jet_exp(ScalarJet.constant(0, 0.0, 4))
    assert np.allclose(e.coeffs, [1, 0, 0, 0, 0])


def test_exp_of_t():
    e = scalar_jet_exp(ScalarJet.identity(0.0, 3))
    assert np.allclose(e.coeffs, [1, 1, 0.5, 1 / 6])


@settings(max_examples=1000, deadline=None)
@given(scalar_jets())
def test_exp_round_trip(f):
    prod = scalar_jet_exp(f) * scalar_jet_exp(-f)
    scale = abs(np.exp(f.data[0])) * abs(np.exp(-f.data[0])) * max(1, np.abs(f.data).max()) ** 6
    assert np.allclose(prod.data, [1, 0, 0, 0, 0, 0, 0], atol=1e-12 * scale)


@settings(max_examples=300, deadline=None)
@given(scalar_jets(), scalar_jets())
def test_exp_of_sum_is_product(f, g):
    lhs = scalar_jet_exp(f + g).data
    rhs = (scalar_jet_exp(f) * scalar_jet_exp(g)).data
    assert close(lhs, rhs, 1e-11)


def test_asinh_at_zero():
    assert np.allclose(scalar_jet_asinh(0.0, 3).coeffs, [0, 1, 0, -1 / 6])


@pytest.mark.parametrize("u0", [0.0, 0.7, -2.3])
def test_asinh_derivative_identity(u0):
    ash = scalar_jet_asinh(u0, 8)
    inv_sqrt = ScalarJet.from_poly([1, 0, 1], u0, 7).power(-0.5)
    assert np.allclose(ash.derivative().data, inv_sqrt.data, atol=1e-13)


def test_asinh_constant_term():
    assert math.isclose(scalar_jet_asinh(math.sinh(1.0), 4).coeffs[0].real, 1.0, rel_tol=1e-14)


def test_asinh_matches_taylor_numerically():
    u0, h = 0.4, 1e-3
    jet = scalar_jet_asinh(u0, 10)
    approx = sum(c * h ** m for m, c in enumerate(jet.coeffs))
    assert abs(approx - math.asinh(u0 + h)) < 1e-15


def test_extended_ring_agrees_with_double():
    f = ScalarJet(0.0, np.array([0.3, -0.2, 0.1, 0.05]))
    fx = ScalarJet(0.0, np.array(f.coeffs, dtype=complex)).lift()
    import mpmath
    ext = scalar_jet_exp(ScalarJet(0.0, np.array([mpmath.mpc(v) for v in f.coeffs], dtype=object)))
    dbl = scalar_jet_exp(f)
    assert np.allclose(np.array([complex(v) for v in ext.coeffs]), dbl.data, atol=1e-15)
    assert fx.order == 3
