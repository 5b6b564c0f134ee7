import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from SasakiLift.errors import GeometryError, SingularPointError
from SasakiLift.jets.jet import Jet1, Jet2, ORDER, jet_analytic, jet_arith, wirtinger

coordinates = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


def test_product_rule():
    base = (1.0, 2.0)
    x, y = Jet2.variable('x', base), Jet2.variable('y', base)
    f = x * x * y
    assert f.value == pytest.approx(2.0)
    assert f.derivative(1, 0) == pytest.approx(4.0)
    assert f.derivative(2, 1) == pytest.approx(2.0)
    assert f.derivative(3, 0) == pytest.approx(0.0)


def test_reciprocal_series():
    x = Jet2.variable('x')
    inverse = 1.0 / (1.0 + x)
    for k in range(ORDER + 1):
        assert inverse.coeffs[k, 0] == pytest.approx((-1) ** k)


def test_exp_derivatives():
    x = Jet2.variable('x', (0.3, 0.0))
    e = x.exp()
    for k in range(ORDER + 1):
        assert e.derivative(k, 0) == pytest.approx(math.exp(0.3))


def test_wirtinger_of_modulus_squared():
    base = (1.0, 2.0)
    x, y = Jet2.variable('x', base), Jet2.variable('y', base)
    F = x * x + y * y
    assert F.d_z().value == pytest.approx(1.0 - 2.0j)
    assert F.d_zbar().value == pytest.approx(1.0 + 2.0j)
    assert F.d_z().d_zbar().value == pytest.approx(1.0)
    assert wirtinger(F, 'd_z').value == pytest.approx(F.d_z().value)


def test_derivative_reduces_order():
    x = Jet2.variable('x')
    d = (x ** 3).d_x()
    assert d.order == ORDER - 1
    with pytest.raises(GeometryError):
        d.derivative(ORDER, 0)


@pytest.mark.parametrize('kind', ['log', 'sqrt'])
def test_non_positive_argument_is_singular(kind):
    x = Jet2.variable('x', (-1.0, 0.0))
    with pytest.raises(SingularPointError):
        jet_analytic(x, kind)


def test_division_by_vanishing_jet():
    x = Jet2.variable('x')
    with pytest.raises(SingularPointError):
        jet_arith(Jet2.constant(1.0), x, 'div')


def test_unknown_operations():
    x = Jet2.variable('x')
    with pytest.raises(GeometryError):
        jet_arith(x, x, 'pow')
    with pytest.raises(GeometryError):
        wirtinger(x, 'd_w')
    with pytest.raises(GeometryError):
        jet_analytic(x, 'pow')


def test_mixing_jets_is_refused():
    with pytest.raises(GeometryError):
        Jet2.variable('x', (0.0, 0.0)) + Jet2.variable('x', (1.0, 0.0))
    with pytest.raises(GeometryError):
        Jet2.variable('x') + Jet1.variable()


def test_jets_are_immutable():
    x = Jet2.variable('x')
    with pytest.raises(AttributeError):
        x.order = 2
    with pytest.raises(ValueError):
        x.coeffs[0, 0] = 1.0


def test_conjugation_and_reality():
    x, y = Jet2.variable('x', (0.5, 0.5)), Jet2.variable('y', (0.5, 0.5))
    z = x + 1j * y
    assert not z.is_real()
    assert (z * z.conj()).is_real()
    assert (z * z.conj()).value.real == pytest.approx(0.5)


def test_jet1_with_long_order():
    y = Jet1.variable(0.5, order=8)
    f = y.exp()
    assert f.order == 8
    assert f.derivative(8) == pytest.approx(math.exp(0.5))
    assert f.d_y().d_y().order == 6


def test_jet1_embedding_does_not_depend_on_x():
    f = (Jet1.variable(0.2) * 3.0).sin()
    embedded = f.to_jet2(1.5)
    assert embedded.base == (1.5, 0.2)
    assert embedded.d_x().value == pytest.approx(0.0)
    assert embedded.derivative(0, 2) == pytest.approx(f.derivative(2))


@given(coordinates, coordinates)
@settings(max_examples=50, deadline=None)
def test_chain_rule(x0, y0):
    x, y = Jet2.variable('x', (x0, y0)), Jet2.variable('y', (x0, y0))
    f = x.sin() * y
    assert f.derivative(1, 0) == pytest.approx(math.cos(x0) * y0, abs=1e-12)
    assert f.derivative(2, 1) == pytest.approx(-math.sin(x0), abs=1e-12)


@given(coordinates, coordinates)
@settings(max_examples=50, deadline=None)
def test_log_inverts_exp(x0, y0):
    x, y = Jet2.variable('x', (x0, y0)), Jet2.variable('y', (x0, y0))
    a = 0.3 * x - 0.2 * y * y
    back = a.exp().log()
    assert np.allclose(back.coeffs, a.coeffs, atol=1e-10)


@given(st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=-2.0, max_value=2.0))
@settings(max_examples=50, deadline=None)
def test_fractional_power(x0, alpha):
    x = Jet2.variable('x', (x0, 0.0))
    p = x.pow(alpha)
    assert p.value.real == pytest.approx(x0 ** alpha)
    assert p.derivative(1, 0).real == pytest.approx(alpha * x0 ** (alpha - 1.0), rel=1e-10, abs=1e-12)
