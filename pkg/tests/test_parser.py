import math
import pytest
from hypothesis import given, settings, strategies as st
from SasakiLift.errors import ExpressionError, SingularPointError
from SasakiLift.expressions.parser import parse_expression, tokenize

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize('text, expected', [
    ('1 + 2*3', 7.0),
    ('(1 + 2)*3', 9.0),
    ('2^3^2', 512.0),
    ('2**3', 8.0),
    ('-2^2', -4.0),
    ('2^-1', 0.5),
    ('8/4/2', 1.0),
    ('1.5e2 + .5', 150.5),
    ('cos(pi)', -1.0),
    ('+3 - -2', 5.0),
])
def test_precedence_and_literals(text, expected):
    assert parse_expression(text).evaluate() == pytest.approx(expected)


def test_potential_evaluation():
    F = parse_expression('log(1 + x^2 + y^2)')
    assert F.variables == frozenset({'x', 'y'})
    assert F(1.0, 0.0) == pytest.approx(math.log(2.0))
    assert F(0.5, -0.5) == pytest.approx(math.log(1.5))


def test_single_variable_expression():
    F = parse_expression('exp(y)')
    assert F.variables == frozenset({'y'})
    assert F.evaluate(y=1.0) == pytest.approx(math.e)


@pytest.mark.parametrize('text, position', [
    ('x $ y', 2),
    ('foo(x)', 0),
    ('1 +', 3),
    ('(1 + 2', 6),
    ('sin x', 4),
])
def test_syntax_errors_carry_position(text, position):
    with pytest.raises(ExpressionError) as info:
        parse_expression(text)
    assert info.value.position == position
    assert f'position {position}' in str(info.value)


@pytest.mark.parametrize('text', ['', '   ', None])
def test_empty_expression(text):
    with pytest.raises(ExpressionError):
        parse_expression(text)


def test_missing_variable():
    with pytest.raises(ExpressionError):
        parse_expression('x + y').evaluate(x=1.0)


@pytest.mark.parametrize('text, x', [('log(x)', -1.0), ('sqrt(x)', -4.0), ('1/x', 0.0), ('x^0.5', -1.0)])
def test_singular_evaluation(text, x):
    with pytest.raises(SingularPointError):
        parse_expression(text)(x, 0.0)


def test_double_star_token():
    kinds = [token.text for token in tokenize('x**2')]
    assert kinds == ['x', '^', '2', '']


def test_jet_of_fubini_study():
    F = parse_expression('log(1 + x^2 + y^2)')
    jet = F.jet2(0.0, 0.0)
    assert jet.d_z().d_zbar().value == pytest.approx(1.0)
    jet = F.jet2(1.0, 0.0)
    assert jet.d_z().d_zbar().value == pytest.approx(0.25)


def test_jet1_freezes_x():
    F = parse_expression('x*y^2')
    jet = F.jet1(2.0, order=6, x0=3.0)
    assert jet.order == 6
    assert jet.derivative(2) == pytest.approx(6.0)


def test_constant_expression_jets():
    jet = parse_expression('2.5').jet2(0.1, 0.2)
    assert jet.value == pytest.approx(2.5)
    assert jet.d_x().value == pytest.approx(0.0)


def test_equal_trees_compare_equal():
    assert parse_expression('x + 1') == parse_expression('x+1')
    assert hash(parse_expression('x + 1')) == hash(parse_expression('x+1'))
    assert parse_expression('x + 1') != parse_expression('1 + x')


@given(finite, finite, st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0))
@settings(max_examples=100, deadline=None)
def test_polynomial_matches_python(a, b, x, y):
    F = parse_expression(f'{a!r}*x^2 + {b!r}*y - x*y')
    assert F(x, y) == pytest.approx(a * x ** 2 + b * y - x * y, rel=1e-12, abs=1e-9)
