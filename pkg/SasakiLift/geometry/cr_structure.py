"""
cr_structure.py
====================================
CR and Sasakian data of the hypersurface v = F(z, zbar) in C^2.

From the potential F the module builds, pointwise:
  - the contact form lambda = phi (du - i F_z dz + i F_zbar dzbar) with phi = 1 / (2 F_zzbar),
  - the structure function c = -d_z log F_zzbar of d lambda = i dz^dzbar + c dz^lambda + conj(c) dzbar^lambda,
  - the Ricci scalar R = -d_z d_zbar log F_zzbar of the underlying Kahler metric 2 F_zzbar dz dzbar,
  - d_0 eta = 2 F_zzbar for the CR function eta = u + i F.
The adapted frame is d = d_z + i F_z d_u, d_0 = 2 F_zzbar d_u, dual to (dz, dzbar, lambda).

Tubular potentials F = F(y) are evaluated through one-variable jets, with phi = 2 / F_yy,
c = i F_yyy / (2 F_yy) and d_0 eta = F_yy / 2 (the same quantities, written in y).
Nothing depends on u, so d_u c = 0 holds identically.
"""
import functools
import logging
from dataclasses import dataclass
import numpy as np
from scipy.integrate import simpson
from SasakiLift.errors import DomainError, GaugeSingularityError, GeometryError
from SasakiLift.expressions.parser import VARIABLES
from SasakiLift.jets.jet import Jet2

logger = logging.getLogger(__name__)

# one-variable jets for tubular potentials need six derivatives of F
TUBULAR_JET_ORDER = 8

# composite Simpson subintervals per polyline segment
SIMPSON_INTERVALS = 256


@dataclass(frozen=True)
class CRPoint:
    """
    CR data at z = x + iy. Scalars are values at the point, *_jet fields are jets around it.
    """
    z: complex
    F: Jet2
    F_z: complex
    F_zzbar_jet: Jet2
    phi: float
    phi_jet: Jet2
    c: complex
    c_jet: Jet2
    R: float
    eta_o: float
    lambda_du: float
    lambda_dz: complex
    lambda_dz_jet: Jet2
    tubular: bool = False

    @property
    def F_zzbar(self):
        return self.F_zzbar_jet.value.real

    @property
    def x(self):
        return self.z.real

    @property
    def y(self):
        return self.z.imag

    def frame(self):
        """
        The frame (d, d_0) as complex coordinate vectors in the (x, y, u) components.
        """
        d = np.array([0.5, -0.5j, 1j * self.F_z])
        d_o = np.array([0.0, 0.0, 2.0 * self.F_zzbar])
        return d, d_o

    def coframe(self):
        """(mu, lambda) as complex covectors in the (x, y, u) components; mu = dz."""
        mu = np.array([1.0, 1j, 0.0])
        lam = np.array([2.0 * self.lambda_dz.real, -2.0 * self.lambda_dz.imag, self.lambda_du])
        return mu, lam

    def duality_residual(self):
        """max |lambda(d_0) - 1|, |lambda(d)|, |mu(d) - 1|, |mu(d_0)|."""
        d, d_o = self.frame()
        mu, lam = self.coframe()
        return max(abs(lam @ d_o - 1.0), abs(lam @ d), abs(mu @ d - 1.0), abs(mu @ d_o))


def _general_point(potential, x, y):
    F = potential.expr.jet2(x, y)
    if not F.is_real(1e-12):
        raise GeometryError(f'potential {potential.name} is not real-valued at ({x}, {y})')
    F_z = F.d_z()
    F_zzbar = F_z.d_zbar().real
    if F_zzbar.value.real <= 0:
        raise DomainError(f'potential {potential.name} is not strictly pseudoconvex at ({x}, {y}): '
                          f'F_zzbar = {F_zzbar.value.real:.6g}')
    log_f = F_zzbar.log()
    c_jet = -log_f.d_z()
    R = -log_f.d_z().d_zbar().value.real
    phi_jet = 0.5 / F_zzbar
    lambda_dz_jet = -1j * phi_jet * F_z
    return F, F_z.value, F_zzbar, c_jet, R, phi_jet, lambda_dz_jet


def _tubular_point(potential, x, y):
    F1 = potential.expr.jet1(y, TUBULAR_JET_ORDER)
    F_y = F1.d_y()
    F_yy = F_y.d_y()
    if F_yy.value.real <= 0:
        raise DomainError(f'tubular potential {potential.name} is not strictly pseudoconvex at y = {y}: '
                          f'F_yy = {F_yy.value.real:.6g}')
    F_yyy = F_yy.d_y()
    c1 = 1j * F_yyy / (2.0 * F_yy)
    R = -0.25 * F_yy.log().d_y().d_y().value.real
    phi1 = 2.0 / F_yy
    # lambda = (2/F_yy) du - (2 F_y/F_yy) dx, i.e. lambda_dz = -F_y/F_yy
    lambda_dz1 = -F_y / F_yy
    F = F1.to_jet2(x)
    F_z = -0.5j * F_y.value
    return (F, F_z, (0.25 * F_yy).real.to_jet2(x), c1.to_jet2(x), R, phi1.real.to_jet2(x),
            lambda_dz1.to_jet2(x))


@functools.lru_cache(maxsize=8192)
def _cached_point(potential, x, y):
    potential.domain.check(x, y)
    build = _tubular_point if potential.tubular else _general_point
    F, F_z, F_zzbar, c_jet, R, phi_jet, lambda_dz_jet = build(potential, x, y)
    phi = phi_jet.value.real
    return CRPoint(
        z=complex(x, y),
        F=F,
        F_z=complex(F_z),
        F_zzbar_jet=F_zzbar,
        phi=phi,
        phi_jet=phi_jet,
        c=c_jet.value,
        c_jet=c_jet,
        R=R,
        eta_o=2.0 * F_zzbar.value.real,
        lambda_du=phi,
        lambda_dz=lambda_dz_jet.value,
        lambda_dz_jet=lambda_dz_jet,
        tubular=potential.tubular,
    )


def build_cr_point(potential, z):
    """
    CR data of the potential at z.

    Parameters
    ----------
    potential : Potential
        the potential F, with its admissible region
    z : complex
        the point z = x + iy

    Returns
    -------
    point : CRPoint
        phi, c, R, d_0 eta and the contact form coefficients at z (with jets)

    Raises
    ------
    DomainError
        when z is outside the admissible region or F_zzbar <= 0 there
    """
    z = complex(z)
    return _cached_point(potential, z.real, z.imag)


def structure_residuals(point):
    """
    Componentwise deviation of d lambda from i dz^dzbar + c dz^lambda + conj(c) dzbar^lambda,
    computed from the jets of the coefficients of lambda = phi du + L dz + conj(L) dzbar.

    Returns
    -------
    residuals : dict
        'dz^du', 'dzbar^du' and 'dz^dzbar' components of the difference
    """
    phi = point.phi_jet
    L = point.lambda_dz_jet
    Lbar = L.conj()
    c = point.c
    lhs_dz_du = phi.d_z().value
    lhs_dzbar_du = phi.d_zbar().value
    lhs_dz_dzbar = Lbar.d_z().value - L.d_zbar().value
    rhs_dz_du = c * phi.value
    rhs_dzbar_du = np.conj(c) * phi.value
    rhs_dz_dzbar = 1j + c * Lbar.value - np.conj(c) * L.value
    return {
        'dz^du': abs(lhs_dz_du - rhs_dz_du),
        'dzbar^du': abs(lhs_dzbar_du - rhs_dzbar_du),
        'dz^dzbar': abs(lhs_dz_dzbar - rhs_dz_dzbar),
    }


def verify_structure_equation(potential, z):
    """Max-norm deviation of d lambda from the structure equation at z."""
    return max(structure_residuals(build_cr_point(potential, z)).values())


def sasakian_residuals(point):
    """
    Integrability residual |b_x + a_y| for c = a + ib, and |d_z conj(c) - d_zbar c| at the point.
    """
    a = point.c_jet.real
    b = point.c_jet.imag
    integrability = abs(b.d_x().value + a.d_y().value)
    symmetry = abs(point.c_jet.conj().d_z().value - point.c_jet.d_zbar().value)
    return integrability, symmetry


def check_sasakian(potential, samples, tol=1e-9):
    """
    Sasakian criterion d_0 c = 0 with the integrability condition b_x = -a_y at each sample.

    Potentials are expressions over x and y only (the parser admits no u), so d_0 c = 2 F_zzbar d_u c vanishes
    identically; du_c is 0 when the variables of F are within x and y and NaN otherwise, which fails the check.

    Parameters
    ----------
    potential : Potential
        the potential
    samples : iterable of complex
        sample points z
    tol : float
        threshold on the residuals

    Returns
    -------
    result : dict
        {'is_sasakian': bool, 'max_residual': float, 'du_c': float}
    """
    max_residual = 0.0
    for z in samples:
        point = build_cr_point(potential, z)
        integrability, symmetry = sasakian_residuals(point)
        max_residual = max(max_residual, integrability, symmetry)
    du_c = 0.0 if potential.expr.variables <= set(VARIABLES) else float('nan')
    return {'is_sasakian': bool(max_residual < tol and du_c == 0.0), 'max_residual': float(max_residual),
            'du_c': du_c}


def reeb_scale(potential, path, A0=1.0):
    """
    The scale A of the Reeb field A d_0 along a polyline: log A is the line integral of (2a, -2b) where c = a + ib.

    Parameters
    ----------
    potential : Potential
        the potential (must satisfy the Sasakian check)
    path : sequence of complex
        polyline vertices z_0, ..., z_n
    A0 : float
        the value of A at z_0

    Returns
    -------
    A : float
        A at the final vertex

    Raises
    ------
    DomainError
        when the path leaves the admissible region
    """
    path = [complex(z) for z in path]
    if len(path) < 2:
        return float(A0)
    log_A = 0.0
    for z0, z1 in zip(path[:-1], path[1:]):
        t = np.linspace(0.0, 1.0, SIMPSON_INTERVALS + 1)
        dz = z1 - z0
        integrand = np.empty_like(t)
        for k, tk in enumerate(t):
            z = z0 + tk * dz
            if not potential.domain.contains(z.real, z.imag):
                raise DomainError(f'path leaves the admissible region at {z}')
            c = build_cr_point(potential, z).c
            integrand[k] = 2.0 * c.real * dz.real - 2.0 * c.imag * dz.imag
        log_A += simpson(integrand, x=t)
    return float(A0 * np.exp(log_A))


def reeb_field(potential, z, A=1.0):
    """
    The Reeb field Z = A d_0 of the contact form lambda / A as an (x, y, u, r) vector, with the normalisation
    residual |(lambda/A)(Z) - 1|. A is taken pointwise, normally from reeb_scale.
    """
    point = build_cr_point(potential, z)
    _, d_o = point.frame()
    _, lam = point.coframe()
    Z = np.zeros(4)
    Z[:3] = (A * d_o).real
    normalisation = abs((lam / A) @ Z[:3] - 1.0)
    return Z, normalisation


@dataclass(frozen=True)
class GaugePair:
    """
    Gauge change mu' = f (mu + h lambda), lambda' = |f|^2 lambda, given by the real and imaginary parts of f.
    h defaults to -i dbar log f; an explicit h (parts) is checked against it by check_gauge_pair.
    """
    f_re: object
    f_im: object
    h_re: object = None
    h_im: object = None

    def f_jet(self, x, y):
        return self.f_re.jet2(x, y) + 1j * self.f_im.jet2(x, y)

    def h_jet(self, x, y):
        if self.h_re is not None:
            return self.h_re.jet2(x, y) + 1j * self.h_im.jet2(x, y)
        f = self.f_jet(x, y)
        if f.value == 0:
            raise GaugeSingularityError(f'gauge function vanishes at ({x}, {y})')
        return -1j * f.log().d_zbar()


def check_gauge_pair(gauge, x, y):
    """|h - (-i dbar log f)| at (x, y)."""
    f = gauge.f_jet(x, y)
    if f.value == 0:
        raise GaugeSingularityError(f'gauge function vanishes at ({x}, {y})')
    expected = (-1j * f.log().d_zbar()).value
    return abs(gauge.h_jet(x, y).value - expected)


@dataclass(frozen=True)
class GaugeResult:
    c: complex
    alpha: complex
    beta: complex


def gauge_transform(point, gauge):
    """
    Transformed structure functions (c', alpha', beta') under a gauge change, for the coordinate coframe
    mu = dz (alpha = beta = 0). All fields are u-independent, so d acts as d_z, dbar as d_zbar and d_0 log f = 0.

    Raises
    ------
    GaugeSingularityError
        when f vanishes at the point
    """
    x, y = point.x, point.y
    f = gauge.f_jet(x, y)
    if abs(f.value) == 0:
        raise GaugeSingularityError(f'gauge function vanishes at {point.z}')
    log_f = f.log()
    h = gauge.h_jet(x, y)
    f0, h0, c = f.value, h.value, point.c
    d_log_f = log_f.d_z().value
    alpha, beta, d_o_log_f = 0.0, 0.0, 0.0
    c_new = (c - 2j * np.conj(h0) + d_log_f) / f0
    alpha_new = (alpha - d_o_log_f + h0 * d_log_f + h.d_z().value + h0 * c) / abs(f0) ** 2
    beta_new = (beta + 1j * h0 ** 2 + h.d_zbar().value + np.conj(c) * h0) / np.conj(f0) ** 2
    return GaugeResult(complex(c_new), complex(alpha_new), complex(beta_new))


def verify_gauge_structure(potential, z, gauge):
    """
    Rebuilds d lambda' for lambda' = |f|^2 lambda and compares its dz^lambda and dzbar^lambda components
    with those of i mu'^conj(mu') + c' mu'^lambda' + conj(c') conj(mu')^lambda'.
    """
    point = build_cr_point(potential, z)
    x, y = point.x, point.y
    f = gauge.f_jet(x, y)
    if f.value == 0:
        raise GaugeSingularityError(f'gauge function vanishes at {point.z}')
    h = gauge.h_jet(x, y).value
    c_new = gauge_transform(point, gauge).c
    modulus = f * f.conj()
    m0 = modulus.value.real
    c = point.c
    lhs_dz = m0 * c + modulus.d_z().value
    lhs_dzbar = m0 * np.conj(c) + modulus.d_zbar().value
    rhs_dz = 1j * m0 * np.conj(h) + c_new * f.value * m0
    rhs_dzbar = -1j * m0 * h + np.conj(c_new) * np.conj(f.value) * m0
    return max(abs(lhs_dz - rhs_dz), abs(lhs_dzbar - rhs_dzbar))


def einstein_constant(potential, samples, rtol=1e-8):
    """
    Lambda_0 = R / F_zzbar when it is constant over the samples (relative spread below rtol), else None.
    """
    ratios = []
    for z in samples:
        point = build_cr_point(potential, z)
        ratios.append(point.R / point.F_zzbar)
    ratios = np.asarray(ratios)
    scale = max(np.max(np.abs(ratios)), 1e-300)
    if np.max(ratios) - np.min(ratios) > rtol * scale and np.max(np.abs(ratios)) > 1e-12:
        return None
    value = float(np.mean(ratios))
    return 0.0 if abs(value) < 1e-12 else value
