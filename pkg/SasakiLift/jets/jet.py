"""
jet.py
====================================
Truncated Taylor (jet) arithmetic in one and two real variables.
A jet stores the Taylor coefficients of a scalar field around a base point, so that
products, quotients and analytic functions of jets give exact derivatives up to the truncation order.

Coefficients are the plain Taylor coefficients, i.e. coeffs[i, j] = (d/dx)^i (d/dy)^j f / (i! j!).
They are complex throughout: the Wirtinger operators produce complex jets even for real fields.
"""
import math
import numpy as np
from scipy.signal import convolve2d
from SasakiLift.errors import SingularPointError, GeometryError

ORDER = 4

# imaginary parts below this (relative) size are treated as round-off when checking domains
_REAL_TOL = 1e-12

_TOTAL_DEGREE = np.add.outer(np.arange(ORDER + 1), np.arange(ORDER + 1))


def _is_real(value):
    return abs(value.imag) <= _REAL_TOL * max(1.0, abs(value))


def _derivative_sequence(kind, a0, n, alpha=None):
    """
    Returns the derivatives f(a0), f'(a0), ..., f^(n)(a0) of the analytic function `kind`.

    Parameters
    ----------
    kind : str
        one of 'log', 'sqrt', 'exp', 'pow', 'sin', 'cos'
    a0 : complex
        the constant term of the jet the function is composed with
    n : int
        highest derivative needed (the order of the jet)
    alpha : float or None
        exponent, only for kind == 'pow'

    Returns
    -------
    derivs : list of complex
        the n+1 derivatives
    """
    a0 = complex(a0)
    if kind == 'exp':
        return [np.exp(a0)] * (n + 1)
    if kind == 'sin':
        cycle = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
        return [cycle[k % 4] for k in range(n + 1)]
    if kind == 'cos':
        cycle = [np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0)]
        return [cycle[k % 4] for k in range(n + 1)]

    if a0 == 0:
        raise SingularPointError(f'{kind} of a jet with vanishing constant term')
    if kind in ('log', 'sqrt') or (kind == 'pow' and float(alpha) != int(alpha)):
        if _is_real(a0) and a0.real <= 0:
            raise SingularPointError(f'{kind} of a real jet with non-positive constant term {a0.real}')
        if _is_real(a0):
            a0 = complex(a0.real, 0.0)

    if kind == 'log':
        return [np.log(a0)] + [(-1) ** (k - 1) * math.factorial(k - 1) / a0 ** k for k in range(1, n + 1)]
    if kind == 'sqrt':
        alpha = 0.5
    elif kind != 'pow':
        raise GeometryError(f'unknown analytic function: {kind}')

    alpha = float(alpha)
    base = np.sqrt(a0) if alpha == 0.5 else a0 ** alpha
    derivs = []
    falling = 1.0
    for k in range(n + 1):
        derivs.append(falling * base / a0 ** k)
        falling *= (alpha - k)
    return derivs


class _TaylorJet:
    """
    Shared arithmetic of Jet1 and Jet2. Subclasses supply the coefficient product and the masking of
    coefficients beyond the truncation order.
    """
    __slots__ = ('coeffs', 'base', 'order')

    def __init__(self, coeffs, base, order):
        coeffs = np.array(coeffs, dtype=complex)
        coeffs = self._mask(coeffs, order)
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)
        object.__setattr__(self, 'base', base)
        object.__setattr__(self, 'order', int(order))

    def __setattr__(self, name, value):
        raise AttributeError('jets are immutable')

    # -- construction helpers -------------------------------------------------

    def _like(self, coeffs, order=None):
        return type(self)(coeffs, self.base, self.order if order is None else order)

    def _coerce(self, other):
        if isinstance(other, _TaylorJet):
            if type(other) is not type(self):
                raise GeometryError('cannot combine a Jet1 with a Jet2')
            if not np.allclose(other.base, self.base, rtol=0.0, atol=1e-14):
                raise GeometryError(f'jets at different base points: {self.base} vs {other.base}')
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return self.constant_like(other)
        return NotImplemented

    def constant_like(self, value):
        coeffs = np.zeros_like(self.coeffs)
        coeffs.flat[0] = value
        return self._like(coeffs)

    # -- scalar access --------------------------------------------------------

    @property
    def value(self):
        """The constant term, i.e. the value of the field at the base point."""
        return complex(self.coeffs.flat[0])

    @property
    def real(self):
        return self._like(self.coeffs.real)

    @property
    def imag(self):
        return self._like(self.coeffs.imag)

    def conj(self):
        # the variables are real, so conjugation acts coefficientwise
        return self._like(np.conj(self.coeffs))

    def is_real(self, tol=_REAL_TOL):
        return bool(np.max(np.abs(self.coeffs.imag)) <= tol * max(1.0, np.max(np.abs(self.coeffs))))

    def nilpotent(self):
        """The jet minus its constant term."""
        coeffs = np.array(self.coeffs)
        coeffs.flat[0] = 0.0
        return self._like(coeffs)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._like(self.coeffs + other.coeffs, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._like(self.coeffs - other.coeffs, min(self.order, other.order))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._like(self.coeffs * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        return self._like(self._product(self.coeffs, other.coeffs), order)

    __rmul__ = __mul__

    def reciprocal(self):
        b0 = self.value
        if b0 == 0:
            raise SingularPointError('division by a jet with vanishing constant term')
        # 1/(b0 (1 + t)) = (1/b0) sum_k (-t)^k with t nilpotent
        t = self.nilpotent() * (-1.0 / b0)
        total = self.constant_like(1.0)
        power = self.constant_like(1.0)
        for _ in range(self.order):
            power = power * t
            total = total + power
        return total * (1.0 / b0)

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if other == 0:
                raise SingularPointError('division of a jet by zero')
            return self._like(self.coeffs / other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.reciprocal()

    def __pow__(self, exponent):
        if isinstance(exponent, _TaylorJet):
            return (exponent * self.log()).exp()
        if float(exponent) == int(exponent) and exponent >= 0:
            result = self.constant_like(1.0)
            for _ in range(int(exponent)):
                result = result * self
            return result
        return self.pow(exponent)

    # -- analytic functions ---------------------------------------------------

    def compose(self, kind, alpha=None):
        """
        Taylor composition f(a) = sum_k f^(k)(a0)/k! (a - a0)^k, exact since (a - a0)^(order+1) = 0.
        """
        derivs = _derivative_sequence(kind, self.value, self.order, alpha)
        t = self.nilpotent()
        total = self.constant_like(derivs[0])
        power = self.constant_like(1.0)
        for k in range(1, self.order + 1):
            power = power * t
            total = total + power * (derivs[k] / math.factorial(k))
        return total

    def log(self):
        return self.compose('log')

    def exp(self):
        return self.compose('exp')

    def sqrt(self):
        return self.compose('sqrt')

    def pow(self, alpha):
        return self.compose('pow', alpha)

    def sin(self):
        return self.compose('sin')

    def cos(self):
        return self.compose('cos')

    def __repr__(self):
        return f'{type(self).__name__}(base={self.base}, order={self.order}, value={self.value:.6g})'


class Jet2(_TaylorJet):
    """
    Jet of a scalar field in (x, y) around base = (x0, y0), truncated at total order `order` (<= ORDER).
    coeffs is a (ORDER+1) x (ORDER+1) array; entries with i + j > order are kept at zero.
    """
    __slots__ = ()

    def __init__(self, coeffs, base=(0.0, 0.0), order=ORDER):
        super().__init__(coeffs, (float(base[0]), float(base[1])), order)

    @staticmethod
    def _mask(coeffs, order):
        full = np.zeros((ORDER + 1, ORDER + 1), dtype=complex)
        rows, cols = coeffs.shape
        full[:min(rows, ORDER + 1), :min(cols, ORDER + 1)] = coeffs[:ORDER + 1, :ORDER + 1]
        full[_TOTAL_DEGREE > order] = 0.0
        return full

    @staticmethod
    def _product(a, b):
        return convolve2d(a, b)[:ORDER + 1, :ORDER + 1]

    @classmethod
    def constant(cls, value, base=(0.0, 0.0)):
        coeffs = np.zeros((ORDER + 1, ORDER + 1), dtype=complex)
        coeffs[0, 0] = value
        return cls(coeffs, base)

    @classmethod
    def variable(cls, name, base=(0.0, 0.0)):
        """The jet of the coordinate function x or y at base."""
        coeffs = np.zeros((ORDER + 1, ORDER + 1), dtype=complex)
        if name == 'x':
            coeffs[0, 0], coeffs[1, 0] = base[0], 1.0
        elif name == 'y':
            coeffs[0, 0], coeffs[0, 1] = base[1], 1.0
        else:
            raise GeometryError(f'unknown jet variable: {name}')
        return cls(coeffs, base)

    @classmethod
    def from_polynomial(cls, poly, base=(0.0, 0.0)):
        """
        Jet of the polynomial sum_{ij} poly[i, j] X^i Y^j in the shifted variables X = x - x0, Y = y - y0.
        """
        return cls(np.asarray(poly, dtype=complex), base)

    def triangle(self):
        """The (ORDER+1)(ORDER+2)/2 coefficients with i + j <= ORDER, in graded order."""
        return np.array([self.coeffs[i, n - i] for n in range(ORDER + 1) for i in range(n, -1, -1)])

    def derivative(self, i, j):
        """The partial derivative d^i/dx^i d^j/dy^j at the base point."""
        if i + j > self.order:
            raise GeometryError(f'derivative of order {i + j} exceeds jet order {self.order}')
        return complex(self.coeffs[i, j]) * math.factorial(i) * math.factorial(j)

    def d_x(self):
        if self.order < 1:
            raise GeometryError('jet order exhausted')
        coeffs = np.zeros_like(self.coeffs)
        coeffs[:-1, :] = self.coeffs[1:, :] * np.arange(1, ORDER + 1)[:, None]
        return self._like(coeffs, self.order - 1)

    def d_y(self):
        if self.order < 1:
            raise GeometryError('jet order exhausted')
        coeffs = np.zeros_like(self.coeffs)
        coeffs[:, :-1] = self.coeffs[:, 1:] * np.arange(1, ORDER + 1)[None, :]
        return self._like(coeffs, self.order - 1)

    def d_z(self):
        """Wirtinger derivative d/dz = (d/dx - i d/dy) / 2."""
        return (self.d_x() - self.d_y() * 1j) * 0.5

    def d_zbar(self):
        """Wirtinger derivative d/dzbar = (d/dx + i d/dy) / 2."""
        return (self.d_x() + self.d_y() * 1j) * 0.5

    def evaluate(self, x, y):
        """Evaluates the truncated Taylor polynomial at (x, y)."""
        dx, dy = x - self.base[0], y - self.base[1]
        total = 0j
        for i in range(ORDER + 1):
            for j in range(ORDER + 1 - i):
                total += self.coeffs[i, j] * dx ** i * dy ** j
        return total


class Jet1(_TaylorJet):
    """
    Jet of a scalar field in y around base = y0. The truncation order defaults to ORDER; the tubular
    solver uses a longer jet since it differentiates the potential six times.
    """
    __slots__ = ()

    def __init__(self, coeffs, base=0.0, order=None):
        coeffs = np.asarray(coeffs, dtype=complex)
        if order is None:
            order = max(len(coeffs) - 1, ORDER)
        super().__init__(coeffs, float(base), order)

    @staticmethod
    def _mask(coeffs, order):
        full = np.zeros(order + 1, dtype=complex)
        n = min(len(coeffs), order + 1)
        full[:n] = coeffs[:n]
        return full

    def _like(self, coeffs, order=None):
        order = self.order if order is None else order
        coeffs = np.asarray(coeffs)
        if len(coeffs) < self.order + 1:
            coeffs = np.concatenate([coeffs, np.zeros(self.order + 1 - len(coeffs))])
        return Jet1(coeffs[:order + 1], self.base, order)

    def _coerce(self, other):
        other = super()._coerce(other)
        if isinstance(other, Jet1) and other.order != self.order:
            order = min(self.order, other.order)
            return Jet1(other.coeffs[:order + 1], other.base, order)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        return Jet1(self.coeffs[:order + 1] + other.coeffs[:order + 1], self.base, order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        return Jet1(self.coeffs[:order + 1] - other.coeffs[:order + 1], self.base, order)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._like(self.coeffs * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        product = np.convolve(self.coeffs[:order + 1], other.coeffs[:order + 1])[:order + 1]
        return Jet1(product, self.base, order)

    __rmul__ = __mul__

    @classmethod
    def constant(cls, value, base=0.0, order=ORDER):
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, base, order)

    @classmethod
    def variable(cls, base=0.0, order=ORDER):
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0], coeffs[1] = base, 1.0
        return cls(coeffs, base, order)

    def derivative(self, k):
        if k > self.order:
            raise GeometryError(f'derivative of order {k} exceeds jet order {self.order}')
        return complex(self.coeffs[k]) * math.factorial(k)

    def d_y(self):
        if self.order < 1:
            raise GeometryError('jet order exhausted')
        coeffs = self.coeffs[1:] * np.arange(1, self.order + 1)
        return Jet1(coeffs, self.base, self.order - 1)

    def to_jet2(self, x0=0.0):
        """Embeds a jet in y as a Jet2 at (x0, y0) that does not depend on x."""
        coeffs = np.zeros((ORDER + 1, ORDER + 1), dtype=complex)
        n = min(self.order, ORDER) + 1
        coeffs[0, :n] = self.coeffs[:n]
        return Jet2(coeffs, (x0, self.base), min(self.order, ORDER))


def jet_arith(a, b, kind):
    """
    Binary jet arithmetic: kind is one of 'add', 'sub', 'mul', 'div'.
    Raises SingularPointError when dividing by a jet with vanishing constant term.
    """
    operations = {
        'add': lambda: a + b,
        'sub': lambda: a - b,
        'mul': lambda: a * b,
        'div': lambda: a / b,
    }
    if kind not in operations:
        raise GeometryError(f'unknown jet operation: {kind}')
    return operations[kind]()


def jet_analytic(a, kind, alpha=None):
    """Composition of an analytic function ('log', 'sqrt', 'exp', 'pow', 'sin', 'cos') with a jet."""
    if kind == 'pow' and alpha is None:
        raise GeometryError('pow needs an exponent')
    return a.compose(kind, alpha)


def wirtinger(a, which):
    """Wirtinger derivative 'd_z' or 'd_zbar' of a Jet2; the result has order reduced by one."""
    if which == 'd_z':
        return a.d_z()
    if which == 'd_zbar':
        return a.d_zbar()
    raise GeometryError(f'unknown Wirtinger operator: {which}')
