import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from SasakiLift.errors import ConfigError, DomainError, ExpressionError, GaugeSingularityError
from SasakiLift.expressions.parser import parse_expression
from SasakiLift.geometry.cr_structure import (GaugePair, build_cr_point, check_gauge_pair, check_sasakian,
                                              einstein_constant, gauge_transform, reeb_field, reeb_scale,
                                              verify_gauge_structure, verify_structure_equation)
from SasakiLift.geometry.potentials import Domain, Potential, catalog, catalog_names, make_potential
from SasakiLift.input_output.coordinate_utils import sample_plane


@pytest.fixture(scope='module')
def fubini_study():
    return make_potential('fubini_study')


def test_fubini_study_at_origin(fubini_study):
    point = build_cr_point(fubini_study, 0j)
    assert point.F_zzbar == pytest.approx(1.0)
    assert point.c == pytest.approx(0.0)
    assert point.R == pytest.approx(2.0)
    assert point.phi == pytest.approx(0.5)
    assert point.eta_o == pytest.approx(2.0)


def test_fubini_study_at_one(fubini_study):
    point = build_cr_point(fubini_study, 1.0 + 0j)
    assert point.F_zzbar == pytest.approx(0.25)
    assert point.c == pytest.approx(1.0)
    assert point.R == pytest.approx(0.5)


def test_harmonic_potential():
    harmonic = make_potential('harmonic')
    point = build_cr_point(harmonic, 1.5 + 0.3j)
    assert harmonic.expr(1.5, 0.3) == pytest.approx(2 * 1.5 * (1.5 ** 2 + 0.3 ** 2))
    assert point.F_zzbar == pytest.approx(4 * 1.5)
    assert point.R == pytest.approx(1.0 / (4 * 1.5 ** 2))
    assert point.c == pytest.approx(-1.0 / (2 * 1.5))


def test_tubular_exponential():
    tubular = make_potential('tubular')
    point = build_cr_point(tubular, 0.2 + 0.4j)
    assert point.c == pytest.approx(0.5j)
    assert point.R == pytest.approx(0.0, abs=1e-12)
    assert point.F_zzbar == pytest.approx(np.exp(0.4) / 4)
    assert point.phi == pytest.approx(2 / np.exp(0.4))


@pytest.mark.parametrize('name', catalog_names())
def test_structure_equation_holds(name):
    potential = make_potential(name)
    for z in sample_plane(potential.domain, 10, seed=3):
        assert verify_structure_equation(potential, z) < 1e-9
        assert build_cr_point(potential, z).duality_residual() < 1e-12


@pytest.mark.parametrize('name', catalog_names())
def test_catalog_is_sasakian(name):
    potential = make_potential(name)
    result = check_sasakian(potential, sample_plane(potential.domain, 10, seed=1), tol=1e-9)
    assert result['is_sasakian']
    assert result['du_c'] == 0.0


def test_u_dependence_fails_the_sasakian_check():
    with pytest.raises(ExpressionError):
        parse_expression('x^2 + y^2 + u')
    expr = parse_expression('x^2 + y^2')
    expr.variables = frozenset({'x', 'y', 'u'})
    result = check_sasakian(Potential('custom', 'custom', expr), [0.1 + 0.2j])
    assert not result['is_sasakian']
    assert np.isnan(result['du_c'])


@pytest.mark.parametrize('name, expected', [
    ('fubini_study', 2.0), ('poincare', -2.0), ('flat', 0.0), ('harmonic', None), ('tubular', 0.0)])
def test_einstein_constant(name, expected):
    potential = make_potential(name)
    value = einstein_constant(potential, sample_plane(potential.domain, 12, seed=0))
    if expected is None:
        assert value is None
    else:
        assert value == pytest.approx(expected, abs=1e-9)


def test_points_outside_the_region_are_refused(fubini_study):
    with pytest.raises(DomainError):
        build_cr_point(fubini_study, 3.0 + 0j)
    poincare = make_potential('poincare', domain=Domain((-1.0, 1.0), (-1.0, 1.0), 1.0))
    with pytest.raises(DomainError):
        build_cr_point(poincare, 0.8 + 0.8j)


def test_non_pseudoconvex_potential():
    saddle = make_potential('custom', 'x^2 - 3*y^2')
    with pytest.raises(DomainError):
        build_cr_point(saddle, 0.1 + 0.1j)


def test_catalog_overrides():
    assert make_potential('tubular', 'y^4 + y^2').expr.text == 'y^4 + y^2'
    assert make_potential('harmonic').default_p == '4*x'
    assert make_potential('harmonic', phi=('x', 'y')).default_p is None
    with pytest.raises(ConfigError):
        make_potential('tubular', 'x + y^2')
    with pytest.raises(ConfigError):
        make_potential('custom')
    with pytest.raises(ConfigError):
        make_potential('nope')
    assert [potential.name for potential in catalog()] == catalog_names()


def test_reeb_scale_of_flat_potential():
    flat = make_potential('flat')
    assert reeb_scale(flat, [0j, 0.5 + 0.5j], A0=2.0) == pytest.approx(2.0)


def test_reeb_scale_integrates_c():
    tubular = make_potential('tubular')
    # c = i/2, so log A changes by -2 Im(c) dy = -dy
    assert reeb_scale(tubular, [-0.5j, 0.5j]) == pytest.approx(np.exp(-1.0), rel=1e-10)
    assert reeb_scale(tubular, [-0.5 - 0.5j, 0.5 - 0.5j]) == pytest.approx(1.0)


def test_reeb_scale_is_path_independent(fubini_study):
    direct = reeb_scale(fubini_study, [0j, 0.6 + 0.6j])
    around = reeb_scale(fubini_study, [0j, 0.6 + 0j, 0.6 + 0.6j])
    assert direct == pytest.approx(around, rel=1e-9)
    # A = (1 + |z|^2)^2 solves d log A = 2 Re(c dz)
    assert direct == pytest.approx((1 + 0.72) ** 2, rel=1e-9)


def test_reeb_path_leaving_the_region(fubini_study):
    with pytest.raises(DomainError):
        reeb_scale(fubini_study, [0j, 2.0 + 0j])


def test_reeb_field_normalisation(fubini_study):
    A = reeb_scale(fubini_study, [0j, 0.3 + 0.2j])
    Z, normalisation = reeb_field(fubini_study, 0.3 + 0.2j, A)
    assert normalisation < 1e-12
    assert Z[0] == Z[1] == Z[3] == 0.0


def _gauge(re, im):
    return GaugePair(parse_expression(re), parse_expression(im))


def test_gauge_vanishing_f():
    flat = make_potential('flat')
    gauge = _gauge('x', 'y')
    with pytest.raises(GaugeSingularityError):
        gauge_transform(build_cr_point(flat, 0j), gauge)


def test_constant_gauge_scales_c(fubini_study):
    gauge = _gauge('2', '0')
    point = build_cr_point(fubini_study, 0.4 + 0.1j)
    result = gauge_transform(point, gauge)
    assert result.c == pytest.approx(point.c / 2)
    assert result.alpha == pytest.approx(0.0)
    assert result.beta == pytest.approx(0.0)


def test_explicit_h_is_checked():
    gauge = GaugePair(parse_expression('1 + x'), parse_expression('-y'), parse_expression('0'),
                      parse_expression('0'))
    assert check_gauge_pair(gauge, 0.3, 0.2) > 0.1
    default = GaugePair(parse_expression('1 + x'), parse_expression('-y'))
    assert check_gauge_pair(default, 0.3, 0.2) == pytest.approx(0.0, abs=1e-14)


@given(st.floats(min_value=-0.7, max_value=0.7), st.floats(min_value=-0.7, max_value=0.7))
@settings(max_examples=25, deadline=None)
def test_gauge_keeps_the_structure_equation(x, y):
    potential = make_potential('fubini_study')
    gauge = _gauge('1 + x^2', 'x*y')
    assert verify_gauge_structure(potential, complex(x, y), gauge) < 1e-10
