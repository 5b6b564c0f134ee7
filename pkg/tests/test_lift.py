import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from SasakiLift.errors import DomainError, GeometryError
from SasakiLift.expressions.parser import parse_expression
from SasakiLift.geometry.cr_structure import build_cr_point
from SasakiLift.geometry.lift import (LIFT_CONVENTION, MIRRORED_CONVENTION, PHASE_FLIPPED_CONVENTION, Convention,
                                     ExpressionField, KahlerEinsteinMetric, LiftMetric, LiftProfile, assemble_metric,
                                     build_profile, check_frame, compute_H, compute_W, evaluate_B, evaluate_I_and_R33,
                                     explicit_profile, logistic_coefficients, metric_kahler_einstein, psi2_formula,
                                     structure_identities)
from SasakiLift.geometry.potentials import catalog_names, make_potential
from SasakiLift.input_output.coordinate_utils import sample_plane, sample_spacetime


@pytest.fixture(scope='module')
def fubini_study_profile():
    return build_profile(make_potential('fubini_study'), 1.0, 1.5)


def _explicit(name, p, Lambda):
    return explicit_profile(make_potential(name), ExpressionField(parse_expression(p)), Lambda)


def test_fubini_study_data_at_origin(fubini_study_profile):
    point = fubini_study_profile.point(0.0, 0.0)
    assert point.p == pytest.approx(1.0)
    assert point.m == pytest.approx(8j)
    assert point.X == pytest.approx(0.0, abs=1e-14)
    assert point.Y == pytest.approx(1j * point.X)
    assert point.Q == pytest.approx(16j)
    assert point.T == pytest.approx(1.0)
    assert point.s == 0.0 and point.t == 0


def test_fubini_study_H_and_psi2(fubini_study_profile):
    point = fubini_study_profile.point(0.0, 0.0)
    assert compute_H(point, 0.0) == pytest.approx(1.0)
    assert compute_H(point, np.pi / 2) == pytest.approx(-31.0)
    assert psi2_formula(point, 0.0) == pytest.approx(32j)
    assert psi2_formula(point, np.pi) == pytest.approx(0.0, abs=1e-12)
    assert compute_W(point, 0.3) == pytest.approx(0.0, abs=1e-14)


def test_constant_q_solves_the_lift_equation(fubini_study_profile):
    for z in sample_plane(fubini_study_profile.potential.domain, 8, seed=2):
        B = evaluate_B(fubini_study_profile, z.real, z.imag)
        assert abs(B['B']) < 1e-10
        assert abs(B['reduced']) < 1e-10
        # X = c + 2 d log p vanishes identically for the Kahler-Einstein profile
        assert abs(fubini_study_profile.point(z.real, z.imag).X) < 1e-12


def test_harmonic_closed_form_p():
    profile = _explicit('harmonic', '4*x', 0.0)
    for z in sample_plane(profile.potential.domain, 8, seed=0):
        assert abs(evaluate_B(profile, z.real, z.imag)['B']) < 1e-10


@pytest.mark.parametrize('Lambda, expected', [(1.0, -2.0 / 3.0), (0.0, 0.0), (3.0, -2.0)])
def test_flat_unit_p(Lambda, expected):
    profile = _explicit('flat', '1', Lambda)
    B = evaluate_B(profile, 0.2, -0.3)
    assert B['B'] == pytest.approx(expected, abs=1e-12)
    assert B['reduced'] == pytest.approx(expected / 2, abs=1e-12)


@pytest.mark.parametrize('x', [0.6, 1.0, 1.7])
def test_fefferman_robinson_trautman_residual(x):
    profile = _explicit('frt', 'x', 0.0)
    B = evaluate_B(profile, x, 0.1)
    assert B['reduced'] == pytest.approx(3.0 / (64.0 * x), rel=1e-9)
    assert B['consistency'] < 1e-12


@pytest.mark.parametrize('name', catalog_names())
def test_structure_identities(name):
    potential = make_potential(name)
    profile = build_profile(potential, 1.0, 1.0)
    for z in sample_plane(potential.domain, 5, seed=4):
        identities = structure_identities(profile, z.real, z.imag)
        assert identities['dm'] < 1e-9 * max(1.0, abs(profile.point(z.real, z.imag).m))
        assert identities['m_real_part'] == 0.0
        assert identities['Y'] < 1e-14
        assert evaluate_B(profile, z.real, z.imag)['consistency'] < 1e-9


@pytest.mark.parametrize('name', catalog_names())
def test_logistic_coefficient_reduces_to_curvature(name):
    potential = make_potential(name)
    for z in sample_plane(potential.domain, 5, seed=5):
        coefficients = logistic_coefficients(build_cr_point(potential, z))
        assert coefficients['a_long'] == pytest.approx(coefficients['a'], abs=1e-9)
        assert coefficients['a_long_imag'] < 1e-9


@pytest.mark.parametrize('r', [-2.0, -0.4, 0.0, 1.1, 2.5])
def test_H_is_real(fubini_study_profile, r):
    point = fubini_study_profile.point(0.3, -0.2)
    assert isinstance(compute_H(point, r), float)


def test_profile_needs_one_field():
    potential = make_potential('flat')
    field = ExpressionField(parse_expression('1'))
    with pytest.raises(GeometryError):
        explicit_profile(potential, None, 0.0)
    with pytest.raises(GeometryError):
        LiftProfile(potential, 0.0, q_field=field, p_field=field)


def test_non_positive_profiles_are_rejected():
    potential = make_potential('flat')
    with pytest.raises(DomainError):
        build_profile(potential, -1.0, 1.0)
    changing_sign = ExpressionField(parse_expression('x'))
    with pytest.raises(DomainError):
        build_profile(potential, changing_sign, 1.0, samples=[0.5 + 0j, -0.5 + 0j])


@given(st.floats(min_value=-0.8, max_value=0.8), st.floats(min_value=-0.8, max_value=0.8),
       st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-2.5, max_value=2.5))
@settings(max_examples=40, deadline=None)
def test_null_frame(x, y, u, r):
    metric = assemble_metric(build_profile(make_potential('fubini_study'), 1.3, 0.7))
    X = (x, y, u, r)
    gram_error, duality_error = check_frame(metric, X)
    assert gram_error < 1e-10
    assert duality_error < 1e-10
    # k = d_r is null and lambda(e_3) = 1/P
    assert abs(metric.metric(X)[3, 3]) < 1e-12
    assert metric.lambda_form(X) @ metric.frame(X)[2].real == pytest.approx(1.0 / metric.P(X))


def test_null_frame_of_non_einstein_profiles():
    for name, p in (('harmonic', '4*x'), ('frt', 'x')):
        metric = assemble_metric(_explicit(name, p, 0.0))
        for X in sample_spacetime(metric.profile.potential.domain, 5, seed=1):
            gram_error, duality_error = check_frame(metric, X)
            assert gram_error < 1e-10 and duality_error < 1e-10


def test_guard_band():
    metric = assemble_metric(build_profile(make_potential('flat'), 1.0, 0.0))
    with pytest.raises(DomainError):
        metric.metric((0.0, 0.0, 0.0, np.pi))


FLIP = np.diag([1.0, 1.0, 1.0, -1.0])


@pytest.fixture(scope='module')
def harmonic_profile():
    return _explicit('harmonic', '4*x', 0.0)


def test_harmonic_W_has_the_closed_form(harmonic_profile):
    point = harmonic_profile.point(1.2, 0.3)
    c = point.cr.c
    # p = F_zzbar gives X = -c
    assert point.X == pytest.approx(-c, abs=1e-12)
    for r in (-1.3, 0.0, 0.8):
        assert compute_W(point, r) == pytest.approx(-1j * c * np.exp(-1j * r) - 1j * c, abs=1e-12)
        assert compute_W(point, r, MIRRORED_CONVENTION) == pytest.approx(-1j * c * np.exp(1j * r) - 1j * c,
                                                                        abs=1e-12)


def test_mirrored_chart_is_the_pullback(harmonic_profile):
    metric = assemble_metric(harmonic_profile)
    mirrored = assemble_metric(harmonic_profile, convention=MIRRORED_CONVENTION)
    for x, y, u, r in sample_spacetime(harmonic_profile.potential.domain, 4, seed=6):
        X, X_mirrored = (x, y, u, r), (x, y, u, -r)
        assert np.allclose(mirrored.metric(X), FLIP @ metric.metric(X_mirrored) @ FLIP, rtol=1e-12, atol=1e-12)
        assert np.allclose(mirrored.frame(X), metric.frame(X_mirrored) @ FLIP, rtol=1e-12, atol=1e-12)
        assert mirrored.P(X) == pytest.approx(metric.P(X_mirrored))


def test_phase_flipped_W_is_another_metric(harmonic_profile):
    metric = assemble_metric(harmonic_profile)
    flipped = assemble_metric(harmonic_profile, convention=PHASE_FLIPPED_CONVENTION)
    X = (1.1, 0.2, 0.0, 0.9)
    assert not np.allclose(flipped.metric(X), metric.metric(X))
    # where X vanishes the two conventions give the same metric
    fubini_study = build_profile(make_potential('fubini_study'), 1.0, 1.5)
    Y = (0.1, 0.2, 0.0, 0.9)
    assert np.allclose(assemble_metric(fubini_study, convention=PHASE_FLIPPED_CONVENTION).metric(Y),
                       assemble_metric(fubini_study).metric(Y), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('convention', [LIFT_CONVENTION, MIRRORED_CONVENTION, PHASE_FLIPPED_CONVENTION])
def test_null_frame_in_every_convention(harmonic_profile, convention):
    metric = assemble_metric(harmonic_profile, convention=convention)
    for X in sample_spacetime(harmonic_profile.potential.domain, 4, seed=2):
        gram_error, duality_error = check_frame(metric, X)
        assert gram_error < 1e-10 and duality_error < 1e-10
        assert abs(metric.metric(X)[3, 3]) < 1e-12


def test_convention_signs_are_checked():
    with pytest.raises(GeometryError):
        Convention(0, 1)


def test_kahler_einstein_closed_form(fubini_study_profile):
    metric = assemble_metric(fubini_study_profile)
    closed_form = metric_kahler_einstein(fubini_study_profile, 2.0)
    assert isinstance(closed_form, KahlerEinsteinMetric)
    assert closed_form.q == pytest.approx(1.0)
    for X in sample_spacetime(fubini_study_profile.potential.domain, 6, seed=7):
        assert np.allclose(closed_form.metric(X), metric.metric(X), rtol=1e-10, atol=1e-12)


def test_no_closed_form_for_mismatched_signs():
    profile = build_profile(make_potential('poincare'), 1.0, 1.5)
    with pytest.raises(GeometryError):
        metric_kahler_einstein(profile, -2.0)


def test_ric33_formula_vanishes_for_einstein_profile(fubini_study_profile):
    result = evaluate_I_and_R33(fubini_study_profile, 0.3, 0.2, 0.5)
    assert abs(result['I']) < 1e-12
    assert abs(result['ric33_rhs']) < 1e-6
    assert result['ric33_imag'] < 1e-6


def test_lift_metric_is_lorentzian(fubini_study_profile):
    metric = LiftMetric(fubini_study_profile)
    eigenvalues = np.linalg.eigvalsh(metric.metric((0.1, 0.2, 0.0, 0.4)))
    assert np.sum(eigenvalues < 0) == 1
    assert np.sum(eigenvalues > 0) == 3
