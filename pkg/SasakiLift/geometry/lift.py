"""
lift.py
====================================
Shearfree Lorentzian lifts of a Sasakian CR manifold.

On M x R_r the metric

    g = 2 P^2 (mu conj(mu) + lambda (dr + W mu + conj(W) conj(mu) + H lambda)),   mu = dz,

is built with the ansatz s = 0, t = 0, p_u = 0:

    P = p / cos(r/2),  p = f q,  m = i (d_0 eta)^3,
    X = c + 2 d log p,  Y = i X,  W = i X e^{-ir} + Y,
    H = (m/p^4) e^{2ir} + conj(m/p^4) e^{-2ir} + Q e^{ir} + conj(Q) e^{-ir} + T,
    Q = (3m + conj(m))/p^4 + (2/3) Lambda p^2 - (p_z/p)_zbar - d_zbar c,
    T = (3m + 3conj(m))/p^4 + 2 Lambda p^2 - 2 (p_z/p)_zbar - 2 d_zbar c.

With this frame only W = i X e^{-ir} + Y gives the quasi-Einstein pattern when X != 0; the form i X e^{ir} + Y
belongs to the mirrored chart r -> -r, where H is evaluated at -r and dr changes sign (see Convention).
On u-independent fields d acts as d_z. The module also evaluates the formula layer of the curvature of this
family: the function B whose vanishing gives Ric_12 = Ric_34 = Lambda, the function I and the right side of
Ric_33, and the closed form of the Weyl component Psi_2.
"""
import functools
import logging
from dataclasses import dataclass
import numpy as np
from SasakiLift.errors import DomainError, GeometryError
from SasakiLift.geometry.cr_structure import build_cr_point
from SasakiLift.jets.jet import Jet2

logger = logging.getLogger(__name__)

# |cos((r + s)/2)| below this is refused: P blows up at r = pi
GUARD_BAND = 1e-3
# r-sampling stays within |r| <= R_MAX
R_MAX = 2.8


class ConstantField:
    """A constant conformal factor q."""

    def __init__(self, value):
        self.value = float(value)

    def jet(self, x, y):
        return Jet2.constant(self.value, (x, y))

    def __repr__(self):
        return f'ConstantField({self.value})'


class ExpressionField:
    """A field given by an expression over x and y (used for q, or directly for p)."""

    def __init__(self, ast):
        self.ast = ast

    def jet(self, x, y):
        return self.ast.jet2(x, y)

    def __repr__(self):
        return f'ExpressionField({self.ast.text!r})'


@dataclass(frozen=True)
class LiftPoint:
    """Pointwise lift data; *_jet fields are Jet2 around (x, y)."""
    cr: object
    p_jet: Jet2
    p: float
    dlogp_jet: Jet2
    m: complex
    X: complex
    Y: complex
    Q: complex
    T: float

    @property
    def s(self):
        return 0.0

    @property
    def t(self):
        return 0j


class LiftProfile:
    """
    Lift data of a potential for a given conformal factor.

    Parameters
    ----------
    potential : Potential
        the CR structure
    Lambda : float
        cosmological constant
    q_field : object with jet(x, y), optional
        conformal factor q, p = f q with f = sqrt(F_zzbar) (tubular: f = sqrt(F_yy))
    p_field : object with jet(x, y), optional
        p itself, for closed-form profiles; exactly one of q_field and p_field is given
    label : str
        free text used in reports
    """

    def __init__(self, potential, Lambda, q_field=None, p_field=None, label=''):
        if (q_field is None) == (p_field is None):
            raise GeometryError('a lift profile needs exactly one of q_field and p_field')
        self.potential = potential
        self.Lambda = float(Lambda)
        self.q_field = q_field
        self.p_field = p_field
        self.label = label or potential.name
        self._point = functools.lru_cache(maxsize=16384)(self._build_point)

    def f_jet(self, cr):
        f = cr.F_zzbar_jet.sqrt()
        return 2.0 * f if cr.tubular else f

    def point(self, x, y):
        return self._point(float(x), float(y))

    def _build_point(self, x, y):
        cr = build_cr_point(self.potential, complex(x, y))
        if self.p_field is not None:
            p_jet = self.p_field.jet(x, y).real
        else:
            q_jet = self.q_field.jet(x, y).real
            if q_jet.value.real <= 0:
                raise DomainError(f'rejected profile: q = {q_jet.value.real:.6g} <= 0 at ({x}, {y})')
            p_jet = self.f_jet(cr) * q_jet
        p = p_jet.value.real
        if p <= 0:
            raise DomainError(f'rejected profile: p = {p:.6g} <= 0 at ({x}, {y})')

        dlogp_jet = p_jet.d_z() / p_jet
        X = cr.c + 2.0 * dlogp_jet.value
        m = 1j * cr.eta_o ** 3
        p4 = p ** 4
        dlogp_zbar = dlogp_jet.d_zbar().value.real
        dzbar_c = cr.c_jet.d_zbar().value.real
        Lambda = self.Lambda
        Q = (3 * m + np.conj(m)) / p4 + (2.0 / 3.0) * Lambda * p ** 2 - dlogp_zbar - dzbar_c
        T = (3 * m + 3 * np.conj(m)) / p4 + 2.0 * Lambda * p ** 2 - 2.0 * dlogp_zbar - 2.0 * dzbar_c
        return LiftPoint(cr=cr, p_jet=p_jet, p=p, dlogp_jet=dlogp_jet, m=complex(m), X=complex(X),
                         Y=complex(1j * X), Q=complex(Q), T=float(T.real))

    def check_positive(self, samples):
        """Evaluates p at every sample; raises DomainError on the first non-positive value."""
        for z in samples:
            self.point(z.real, z.imag)
        return True

    def __repr__(self):
        field = self.q_field if self.q_field is not None else self.p_field
        return f'LiftProfile({self.label}, Lambda={self.Lambda}, {field!r})'


def build_profile(potential, q, Lambda, samples=None, label=''):
    """
    The lift profile for conformal factor q (a number or a field with jet(x, y)).
    If samples are given, q > 0 is checked at each of them.
    """
    field = ConstantField(q) if isinstance(q, (int, float)) else q
    if isinstance(field, ConstantField) and field.value <= 0:
        raise DomainError(f'rejected profile: constant q = {field.value} <= 0')
    profile = LiftProfile(potential, Lambda, q_field=field, label=label)
    if samples is not None:
        profile.check_positive(samples)
    return profile


def explicit_profile(potential, p_field, Lambda, label=''):
    """A lift profile with p given directly (e.g. p = F_zzbar, p = F_zzbar^(2/3))."""
    return LiftProfile(potential, Lambda, p_field=p_field, label=label)


@dataclass(frozen=True)
class Convention:
    """
    Sign conventions of a lift metric: W = i X e^{w_phase i r} + Y, H is evaluated at orientation * r and
    omega = orientation dr + W mu + conj(W) conj(mu) + H lambda.
    """
    w_phase: int = -1
    orientation: int = 1

    def __post_init__(self):
        if self.w_phase not in (-1, 1) or self.orientation not in (-1, 1):
            raise GeometryError(f'convention signs must be +1 or -1, got {self.w_phase}, {self.orientation}')


LIFT_CONVENTION = Convention(-1, 1)
# the pull-back of LIFT_CONVENTION by r -> -r
MIRRORED_CONVENTION = Convention(1, -1)
# e^{ir} in W without reflecting r: not a lift once X != 0
PHASE_FLIPPED_CONVENTION = Convention(1, 1)


def compute_W(point, r, convention=LIFT_CONVENTION):
    """W = i X e^{-ir} + Y at angle r (e^{+ir} for a convention with w_phase = 1)."""
    return 1j * point.X * np.exp(convention.w_phase * 1j * r) + point.Y


def compute_H_complex(point, r):
    m_p4 = point.m / point.p ** 4
    return (m_p4 * np.exp(2j * r) + np.conj(m_p4) * np.exp(-2j * r)
            + point.Q * np.exp(1j * r) + np.conj(point.Q) * np.exp(-1j * r) + point.T)


def compute_H(point, r):
    """The real function H at angle r; raises GeometryError if the imaginary part is not round-off."""
    H = compute_H_complex(point, r)
    scale = max(1.0, abs(point.m) / point.p ** 4 + abs(point.Q) + abs(point.T))
    if abs(H.imag) > 1e-12 * scale:
        raise GeometryError(f'H is not real: imaginary part {H.imag:.3g}')
    return float(H.real)


def psi2_formula(point, r):
    """Psi_2 = (1 + e^{ir})^3 m / (2 p^6)."""
    return complex((1.0 + np.exp(1j * (r + point.s))) ** 3 * point.m / (2.0 * point.p ** 6))


def evaluate_B(profile, x, y):
    """
    The function B and the reduced residual
        p_zzbar + conj(c)/2 p_z + c/2 p_zbar + (|c|^2/4 + 3/4 d_z conj(c)) p - Lambda/3 p^3
    at (x, y). Since m is purely imaginary, B = 2 x reduced.

    Returns
    -------
    result : dict
        {'B': complex, 'reduced': complex, 'consistency': |B - 2 reduced|, 'm_term': (m + conj(m))/p^3}
    """
    point = profile.point(x, y)
    cr = point.cr
    p_jet = point.p_jet
    p = point.p
    c = cr.c
    p_z = p_jet.d_z()
    p_zbar = p_jet.d_zbar()
    p_zzbar = p_z.d_zbar().value
    dzbar_c = cr.c_jet.d_zbar().value
    dz_cbar = cr.c_jet.conj().d_z().value
    Lambda = profile.Lambda
    m_term = (point.m + np.conj(point.m)) / p ** 3
    B = (2.0 * p_zzbar + np.conj(c) * p_z.value + c * p_zbar.value + 0.5 * abs(c) ** 2 * p
         + 1.5 * dzbar_c * p - m_term - (2.0 / 3.0) * Lambda * p ** 3)
    reduced = (p_zzbar + 0.5 * np.conj(c) * p_z.value + 0.5 * c * p_zbar.value
               + (0.25 * abs(c) ** 2 + 0.75 * dz_cbar) * p - Lambda / 3.0 * p ** 3)
    return {'B': complex(B), 'reduced': complex(reduced), 'consistency': float(abs(B - 2.0 * reduced)),
            'm_term': complex(m_term)}


def structure_identities(profile, x, y):
    """
    Residuals of the identities of the lift ansatz at (x, y):
      'dm': |d_z m + 3 c m|, 'm_real_part': |m + conj(m)|, 't': |d t + (c - t) t| at t = 0,
      'Y': |Y - i X|.
    """
    point = profile.point(x, y)
    cr = point.cr
    m_jet = 1j * (2.0 * cr.F_zzbar_jet) ** 3
    dm = abs(m_jet.d_z().value + 3.0 * cr.c * point.m)
    return {
        'dm': float(dm),
        'm_real_part': float(abs(point.m + np.conj(point.m))),
        't': 0.0,
        'Y': float(abs(point.Y - 1j * point.X)),
    }


def _I_value(profile, x, y):
    point = profile.point(x, y)
    w = point.dlogp_jet + point.cr.c_jet
    return complex(w.d_z().value + w.value ** 2)


def _d_z_numeric(func, x, y, h):
    """Wirtinger d_z of a pointwise function by Richardson-extrapolated central differences."""
    def central(step):
        dx = (func(x + step, y) - func(x - step, y)) / (2 * step)
        dy = (func(x, y + step) - func(x, y - step)) / (2 * step)
        return 0.5 * (dx - 1j * dy)
    return (4.0 * central(h / 2) - central(h)) / 3.0


def evaluate_I_and_R33(profile, x, y, r, h=1e-3):
    """
    The function I = d(d log p + c) + (d log p + c)^2 and the right side of the Ric_33 formula
        { 8/p^4 (d + 2c)[p^2 (d conj(I) - 2 Lambda (2 dbar log p + conj(c)) p^2)] + 16 Lambda/p B
          + 16 i/p^3 d_0(m/p^4) } cos^4(r/2)
    at (x, y, r). d_0(m/p^4) vanishes since nothing depends on u. Derivatives of I beyond the jet order are
    taken by extrapolated central differences with step h.

    Returns
    -------
    result : dict
        {'I': complex, 'dz_Ibar': complex, 'ric33_rhs': float, 'ric33_imag': float}
    """
    Lambda = profile.Lambda

    def Ibar(xx, yy):
        return np.conj(_I_value(profile, xx, yy))

    def dz_Ibar(xx, yy):
        return _d_z_numeric(Ibar, xx, yy, h)

    def bracket(xx, yy):
        point = profile.point(xx, yy)
        dbar_log_p = np.conj(point.dlogp_jet.value)
        p2 = point.p ** 2
        return p2 * (dz_Ibar(xx, yy) - 2.0 * Lambda * (2.0 * dbar_log_p + np.conj(point.cr.c)) * p2)

    point = profile.point(x, y)
    outer = _d_z_numeric(bracket, x, y, h) + 2.0 * point.cr.c * bracket(x, y)
    B = evaluate_B(profile, x, y)['B']
    d_o_m = 0.0
    total = (8.0 / point.p ** 4 * outer + 16.0 * Lambda / point.p * B
             + 16j / point.p ** 3 * d_o_m) * np.cos((r + point.s) / 2.0) ** 4
    return {'I': _I_value(profile, x, y), 'dz_Ibar': complex(dz_Ibar(x, y)), 'ric33_rhs': float(total.real),
            'ric33_imag': float(abs(total.imag))}


class MetricField:
    """
    A Lorentzian metric on coordinates (x, y, u, r). Subclasses implement metric(X); frame(X) returns the rows
    e_1..e_4 of a (complex) frame, by default the coordinate frame.
    """

    def metric(self, X):
        raise NotImplementedError

    def frame(self, X):
        return np.eye(4, dtype=complex)

    def P(self, X):
        return 1.0

    def gram(self, X):
        E = self.frame(X)
        return E @ self.metric(X) @ E.T


class CallableMetric(MetricField):
    """A metric given by a function X -> 4x4 matrix, with an optional frame function."""

    def __init__(self, func, frame_func=None, name='metric'):
        self.func = func
        self.frame_func = frame_func
        self.name = name

    def metric(self, X):
        return np.asarray(self.func(np.asarray(X, dtype=float)), dtype=float)

    def frame(self, X):
        if self.frame_func is None:
            return super().frame(X)
        return np.asarray(self.frame_func(np.asarray(X, dtype=float)), dtype=complex)


GRAM = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)


class LiftMetric(MetricField):
    """
    The metric of a lift profile with its null frame e_1..e_4 and coframe theta^1..theta^4.
    g(e_1, e_2) = g(e_3, e_4) = 1, all other pairings vanish; k = d_r = orientation P e_4 is null.
    """

    def __init__(self, profile, guard=GUARD_BAND, convention=LIFT_CONVENTION):
        self.profile = profile
        self.guard = guard
        self.convention = convention

    def _data(self, X):
        x, y, u, r = (float(v) for v in X)
        cosine = np.cos(r / 2.0)
        if abs(cosine) < self.guard:
            raise DomainError(f'r = {r} is inside the guard band of the coordinate singularity of P')
        point = self.profile.point(x, y)
        P = point.p / cosine
        convention = self.convention
        return point, P, compute_W(point, r, convention), compute_H(point, convention.orientation * r)

    def P(self, X):
        return self._data(X)[1]

    def coframe(self, X):
        point, P, W, H = self._data(X)
        cr = point.cr
        mu = np.array([1.0, 1j, 0.0, 0.0])
        lam = np.array([2.0 * cr.lambda_dz.real, -2.0 * cr.lambda_dz.imag, cr.lambda_du, 0.0], dtype=complex)
        dr = np.array([0.0, 0.0, 0.0, self.convention.orientation], dtype=complex)
        omega = dr + W * mu + np.conj(W) * np.conj(mu) + H * lam
        return P * np.array([mu, np.conj(mu), lam, omega])

    def frame(self, X):
        point, P, W, H = self._data(X)
        cr = point.cr
        sign = self.convention.orientation
        d = np.array([0.5, -0.5j, 1j * cr.F_z, 0.0])
        d_o = np.array([0.0, 0.0, 2.0 * cr.F_zzbar, 0.0], dtype=complex)
        d_r = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)
        e1 = (d - sign * W * d_r) / P
        e2 = (np.conj(d) - sign * np.conj(W) * d_r) / P
        e3 = (d_o - sign * H * d_r) / P
        e4 = sign * d_r / P
        return np.array([e1, e2, e3, e4])

    def metric(self, X):
        theta = self.coframe(X)
        G = (np.outer(theta[0], theta[1]) + np.outer(theta[1], theta[0])
             + np.outer(theta[2], theta[3]) + np.outer(theta[3], theta[2]))
        return G.real

    def lambda_form(self, X):
        """lambda as a real covector; lambda(e_3) = 1/P."""
        return (self.coframe(X)[2] / self.P(X)).real


def assemble_metric(profile, guard=GUARD_BAND, convention=LIFT_CONVENTION):
    """The metric field of a lift profile."""
    return LiftMetric(profile, guard, convention)


class KahlerEinsteinMetric(MetricField):
    """
    The Einstein lift of a Kahler-Einstein potential in closed form:
        g = q^2 / cos^2(r/2) (h + lambda' (dr + phi H lambda')),  h = 2 F_zzbar dz dzbar,  lambda' = lambda/phi,
    with q^2 = 3 Lambda_0 / (4 Lambda). Defined for profiles with X = 0.
    """

    def __init__(self, profile, q):
        self.profile = profile
        self.q = float(q)

    def metric(self, X):
        x, y, u, r = (float(v) for v in X)
        point = self.profile.point(x, y)
        cr = point.cr
        H = compute_H(point, r)
        lam_prime = np.array([2.0 * cr.lambda_dz.real, -2.0 * cr.lambda_dz.imag, cr.lambda_du, 0.0]) / cr.phi
        dr = np.array([0.0, 0.0, 0.0, 1.0])
        h = np.diag([2.0 * cr.F_zzbar, 2.0 * cr.F_zzbar, 0.0, 0.0])
        second = dr + cr.phi * H * lam_prime
        sym = 0.5 * (np.outer(lam_prime, second) + np.outer(second, lam_prime))
        return self.q ** 2 / np.cos(r / 2.0) ** 2 * (h + sym)


def check_frame(metric, X):
    """
    Max deviations of the frame pairings from the Gram matrix and of theta^a(e_b) from the identity.
    """
    gram_error = float(np.max(np.abs(metric.gram(X) - GRAM)))
    duality_error = float(np.max(np.abs(metric.coframe(X) @ metric.frame(X).T - np.eye(4))))
    return gram_error, duality_error


def metric_kahler_einstein(profile, Lambda0):
    """
    Closed-form metric of the constant solution q = sqrt(3 Lambda_0 / (4 Lambda)) of a Kahler-Einstein potential.
    """
    ratio = 3.0 * Lambda0 / (4.0 * profile.Lambda) if profile.Lambda != 0 else -1.0
    if ratio <= 0:
        raise GeometryError(f'no constant solution for Lambda_0 = {Lambda0} and Lambda = {profile.Lambda}')
    return KahlerEinsteinMetric(profile, np.sqrt(ratio))


def logistic_coefficients(cr):
    """
    Coefficients of the logistic equation q_zzbar + a q = b q^3 obtained from p = f q.

    Returns
    -------
    coefficients : dict
        'a_long': f_zzbar/f + f_z conj(c)/(2f) + f_zbar c/(2f) + |c|^2/4 + 3/4 d_z conj(c),
        'a': R/4, 'f2': f^2 (so that b = Lambda f^2 / 3)
    """
    f = cr.F_zzbar_jet.sqrt()
    if cr.tubular:
        f = 2.0 * f
    f0 = f.value.real
    c = cr.c
    f_z = f.d_z()
    a_long = (f_z.d_zbar().value / f0 + f_z.value * np.conj(c) / (2.0 * f0) + f.d_zbar().value * c / (2.0 * f0)
              + 0.25 * abs(c) ** 2 + 0.75 * cr.c_jet.conj().d_z().value)
    return {'a_long': float(a_long.real), 'a_long_imag': float(abs(a_long.imag)), 'a': 0.25 * cr.R,
            'f2': f0 ** 2}
