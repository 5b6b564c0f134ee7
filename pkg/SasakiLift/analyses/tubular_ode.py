"""
tubular_ode.py
====================================
Conformal factor of tubular potentials F = F(y). With f = sqrt(F_yy) the lift equation becomes the ODE

    q'' + R q = kappa Lambda F_yy q^3,   R = -(1/4) (log F_yy)'',

with kappa = 4/3 by default, integrated as an initial-value problem with the classical 4-stage Runge-Kutta
scheme. Higher derivatives of q at any y come from the ODE itself, differentiated with one-variable jets.
"""
import logging
from dataclasses import dataclass
import numpy as np
import pandas as pd
from scipy.interpolate import BPoly
from SasakiLift.errors import DomainError, SolverError
from SasakiLift.jets.jet import Jet1

logger = logging.getLogger(__name__)

# kappa = 4/3 reproduces the planar lift equation with f = sqrt(F_yy); 16/3 is kept as an option
CONSISTENT_COUPLING = 4.0 / 3.0
PRINTED_COUPLING = 16.0 / 3.0
DEFAULT_COUPLING = CONSISTENT_COUPLING

# derivatives of q stored per node for the dense output (q .. q'''')
_NODE_DERIVATIVES = 5

# jet order used to differentiate F six times
_JET_ORDER = 8


def tubular_coefficients(potential, y, order=_JET_ORDER):
    """
    Jets of R and F_yy in y, of order `order` - 6 and `order` - 2.

    Raises
    ------
    DomainError
        when y leaves the admissible region or F_yy <= 0
    """
    if not potential.domain.y_range[0] <= y <= potential.domain.y_range[1]:
        raise DomainError(f'y = {y} lies outside the admissible region {potential.domain.describe()}')
    F_yy = potential.expr.jet1(y, order).d_y().d_y().real
    if F_yy.value.real <= 0:
        raise DomainError(f'tubular potential is not strictly pseudoconvex at y = {y}')
    R = -0.25 * F_yy.log().d_y().d_y()
    return R.real, F_yy


def _rhs(potential, Lambda, coupling, y, q, qp):
    R, F_yy = tubular_coefficients(potential, y)
    return qp, -R.value.real * q + coupling * Lambda * F_yy.value.real * q ** 3


def taylor_derivatives(potential, Lambda, coupling, y, q, qp, count=5):
    """
    q, q', ..., q^(count-1) at y from the values q(y), q'(y): the Taylor coefficients of q satisfy
    q_{k+2} (k+1)(k+2) = [-R q + kappa Lambda F_yy q^3]_k, solved order by order.
    """
    R, F_yy = tubular_coefficients(potential, y, max(_JET_ORDER, count + 3))
    order = count - 1
    R = Jet1(R.coeffs[:order + 1], y, order)
    F_yy = Jet1(F_yy.coeffs[:order + 1], y, order)
    coeffs = np.zeros(order + 1)
    coeffs[0] = q
    if order >= 1:
        coeffs[1] = qp
    for k in range(order - 1):
        q_jet = Jet1(coeffs, y, order)
        G = -1.0 * (R * q_jet) + (coupling * Lambda) * (F_yy * q_jet * q_jet * q_jet)
        coeffs[k + 2] = G.coeffs[k].real / ((k + 1) * (k + 2))
    factorials = np.cumprod(np.concatenate([[1.0], np.arange(1, order + 1)]))
    return coeffs * factorials


@dataclass
class OdeSolution:
    """
    Nodes y[k] with q[k], q'[k] and q''[k]. Dense output is the Hermite interpolant through q and its first four
    derivatives at the nodes, the higher ones taken from the ODE, so the third derivative seen by the curvature
    stencil stays accurate to O(h^7).
    """
    y: np.ndarray
    q: np.ndarray
    qp: np.ndarray
    qpp: np.ndarray
    step: float
    Lambda: float
    coupling: float
    potential: object

    @property
    def y_range(self):
        return float(self.y[0]), float(self.y[-1])

    def _dense(self):
        if not hasattr(self, '_interpolant'):
            derivatives = np.array([taylor_derivatives(self.potential, self.Lambda, self.coupling, y, q, qp,
                                                       _NODE_DERIVATIVES)
                                    for y, q, qp in zip(self.y, self.q, self.qp)])
            self._interpolant = BPoly.from_derivatives(self.y, derivatives)
        return self._interpolant

    def _check_inside(self, y):
        lo, hi = self.y_range
        if not lo - 1e-12 <= y <= hi + 1e-12:
            raise DomainError(f'y = {y} lies outside the integration range [{lo}, {hi}]')

    def __call__(self, y):
        self._check_inside(y)
        return float(self._dense()(y))

    def derivatives(self, y, count=5):
        """(q, q', q'', q''', q'''') at y, from the dense values of q and q' and the differentiated ODE."""
        self._check_inside(y)
        dense = self._dense()
        return taylor_derivatives(self.potential, self.Lambda, self.coupling, y, float(dense(y)),
                                  float(dense(y, 1)), count)

    def jet1(self, y, order=4):
        derivs = self.derivatives(y, order + 1)
        factorials = np.cumprod(np.concatenate([[1.0], np.arange(1, order + 1)]))
        return Jet1(derivs / factorials, y, order)

    def to_frame(self):
        return pd.DataFrame({'y': self.y, 'q': self.q, 'qp': self.qp, 'qpp': self.qpp})


class OdeField:
    """An ODE solution seen as an x-independent field, so it can drive a lift profile."""

    def __init__(self, solution):
        self.solution = solution

    def jet(self, x, y):
        return self.solution.jet1(y).to_jet2(x)

    def __repr__(self):
        lo, hi = self.solution.y_range
        return f'OdeField(y in [{lo}, {hi}], h = {self.solution.step})'


def solve_tubular(potential, Lambda, q0, qp0, y_range, h, coupling=DEFAULT_COUPLING):
    """
    Integrates q'' = -R q + kappa Lambda F_yy q^3 from y_range[0] with q = q0, q' = qp0.

    Parameters
    ----------
    potential : Potential
        a tubular potential F(y)
    Lambda : float
        cosmological constant (any sign)
    q0, qp0 : float
        initial values, q0 > 0
    y_range : tuple of float
        integration interval
    h : float
        largest step; the interval is split into equal steps no longer than h
    coupling : float
        kappa, CONSISTENT_COUPLING by default

    Returns
    -------
    solution : OdeSolution

    Raises
    ------
    SolverError
        when q reaches zero, with the crossing location, or when the solution blows up, with the start of the
        step that left the finite range
    """
    if not potential.tubular:
        raise DomainError(f'potential {potential.name} is not tubular')
    if q0 <= 0:
        raise SolverError(f'initial value q0 = {q0} must be positive', location=y_range[0])
    y0, y1 = float(y_range[0]), float(y_range[1])
    count = max(1, int(np.ceil((y1 - y0) / h - 1e-9)))
    nodes = np.linspace(y0, y1, count + 1)

    def rhs(y, state):
        return np.array(_rhs(potential, Lambda, coupling, y, state[0], state[1]))

    states = np.empty((count + 1, 2))
    states[0] = (q0, qp0)
    for k in range(count):
        y, dy = nodes[k], nodes[k + 1] - nodes[k]
        state = states[k]
        # overflow is reported through the finiteness check below
        with np.errstate(over='ignore', invalid='ignore'):
            k1 = rhs(y, state)
            k2 = rhs(y + dy / 2, state + dy / 2 * k1)
            k3 = rhs(y + dy / 2, state + dy / 2 * k2)
            k4 = rhs(y + dy, state + dy * k3)
            states[k + 1] = state + dy / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(states[k + 1])):
            raise SolverError(f'q blows up in the step starting at y = {y:.6g}', location=float(y))
        if states[k + 1, 0] <= 0:
            q_a, q_b = states[k, 0], states[k + 1, 0]
            location = y + dy * q_a / (q_a - q_b)
            raise SolverError(f'q crosses zero near y = {location:.6g}', location=location)

    qpp = np.array([rhs(y, state)[1] for y, state in zip(nodes, states)])
    logger.info(f'tubular ODE integrated over [{y0}, {y1}] in {count} steps (kappa = {coupling:.6g}), q in '
                f'[{states[:, 0].min():.6g}, {states[:, 0].max():.6g}]')
    return OdeSolution(nodes, states[:, 0], states[:, 1], qpp, (y1 - y0) / count, float(Lambda), float(coupling),
                       potential)
