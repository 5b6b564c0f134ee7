"""
logistic_solver.py
====================================
Conformal factor q of the lift on a rectangle: the logistic equation

    q_zzbar + a q = b q^3,   a = R/4,   b = Lambda f^2 / 3,

written in real coordinates as (q_xx + q_yy)/4 + a q = b q^3, solved by damped Newton iteration on a uniform grid
with the 5-point Laplacian and Dirichlet data sqrt(a/b). Also holds the constant solution of Kahler-Einstein
potentials and the residual of the reduced lift equation at off-grid points.
"""
import logging
import time
import warnings
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from scipy import sparse
from scipy.interpolate import RectBivariateSpline
from scipy.sparse.linalg import spsolve
from SasakiLift.errors import DomainError, HypothesisWarning, SolverError
from SasakiLift.geometry.cr_structure import build_cr_point, einstein_constant
from SasakiLift.geometry.lift import build_profile, evaluate_B, logistic_coefficients, LiftProfile
from SasakiLift.jets.jet import Jet2

logger = logging.getLogger(__name__)

# lower clamp of a/b for the Dirichlet data and the initial guess
EPSILON = 1e-6

DEFAULT_GRID = {'nx': 65, 'ny': 65, 'tol': 1e-9, 'max_iters': 50}

_MIN_STEP = 1.0 / 1024


@dataclass
class GridSolution:
    """
    Solution of the logistic equation on the nodes x[i], y[j] of a rectangle; q[i, j] is the value at (x[i], y[j]).
    """
    x: np.ndarray
    y: np.ndarray
    q: np.ndarray
    residual_norm: float
    newton_iters: int
    history: list = field(default_factory=list)

    @property
    def nx(self):
        return len(self.x)

    @property
    def ny(self):
        return len(self.y)

    @property
    def domain(self):
        return (float(self.x[0]), float(self.x[-1])), (float(self.y[0]), float(self.y[-1]))

    def _spline(self):
        if not hasattr(self, '_interpolator'):
            self._interpolator = RectBivariateSpline(self.x, self.y, self.q, kx=3, ky=3)
        return self._interpolator

    def _check_inside(self, x, y):
        (x0, x1), (y0, y1) = self.domain
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            raise DomainError(f'sample ({x}, {y}) lies outside the grid [{x0}, {x1}] x [{y0}, {y1}]')

    def __call__(self, x, y):
        self._check_inside(x, y)
        return float(self._spline()(x, y)[0, 0])

    def jet(self, x, y):
        """Second-order Jet2 of the bicubic interpolant at (x, y)."""
        self._check_inside(x, y)
        spline = self._spline()
        coeffs = np.zeros((3, 3))
        for i, j, scale in ((0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (2, 0, 0.5), (1, 1, 1.0), (0, 2, 0.5)):
            coeffs[i, j] = spline(x, y, dx=i, dy=j)[0, 0] * scale
        return Jet2(coeffs, (x, y), order=2)

    def to_frame(self):
        X, Y = np.meshgrid(self.x, self.y, indexing='ij')
        return pd.DataFrame({'x': X.ravel(), 'y': Y.ravel(), 'q': self.q.ravel()})


def _second_difference(n, h):
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    return sparse.diags([off, main, off], [-1, 0, 1]) / h ** 2


def laplacian(nx, ny, hx, hy):
    """5-point Laplacian on an nx x ny grid, nodes flattened with the y index fastest."""
    return (sparse.kron(_second_difference(nx, hx), sparse.identity(ny))
            + sparse.kron(sparse.identity(nx), _second_difference(ny, hy))).tocsr()


def wirtinger_laplacian(q, hx, hy):
    """
    d_z d_zbar q = (d_x - i d_y)(d_x + i d_y) q / 4 on interior nodes (zero on the boundary); the mixed
    derivatives cancel, leaving a quarter of the 5-point Laplacian.
    """
    result = np.zeros_like(q, dtype=float)
    q_xx = (q[2:, 1:-1] - 2 * q[1:-1, 1:-1] + q[:-2, 1:-1]) / hx ** 2
    q_yy = (q[1:-1, 2:] - 2 * q[1:-1, 1:-1] + q[1:-1, :-2]) / hy ** 2
    result[1:-1, 1:-1] = 0.25 * (q_xx + q_yy)
    return result


def node_coefficients(potential, Lambda, x, y):
    """The coefficient arrays a and b at the grid nodes."""
    a = np.empty((len(x), len(y)))
    b = np.empty_like(a)
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            coefficients = logistic_coefficients(build_cr_point(potential, complex(xi, yj)))
            a[i, j] = coefficients['a']
            b[i, j] = Lambda * coefficients['f2'] / 3.0
    return a, b


def boundary_mask(nx, ny):
    mask = np.zeros((nx, ny), dtype=bool)
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
    return mask


def dirichlet_values(a, b):
    """
    sqrt(a/b) clamped below by EPSILON; 1 where b vanishes. Warns when the positivity hypotheses on a and b
    fail on the boundary.
    """
    if np.any(b == 0):
        warnings.warn('b vanishes (Lambda = 0 or f = 0); Dirichlet data set to 1', HypothesisWarning)
    ratio = np.where(b != 0, a / np.where(b != 0, b, 1.0), 1.0)
    return np.sqrt(np.maximum(ratio, EPSILON))


def _check_hypotheses(a, b, mask):
    if np.any(a[mask] <= 0) or np.any(b[mask] <= 0):
        warnings.warn(f'positivity hypotheses on the boundary fail (min a = {a[mask].min():.3g}, '
                      f'min b = {b[mask].min():.3g}); a positive solution may not exist or be unique',
                      HypothesisWarning)


def solve_logistic(potential, Lambda, grid_conf=None, initial_guess=None):
    """
    Solves (q_xx + q_yy)/4 + a q - b q^3 = 0 with Dirichlet data sqrt(a/b) by damped Newton iteration.

    Parameters
    ----------
    potential : Potential
        the CR structure; the grid covers its admissible box unless grid_conf overrides it
    Lambda : float
        cosmological constant
    grid_conf : dict
        'nx', 'ny', 'tol', 'max_iters', optionally 'x_range' and 'y_range'
    initial_guess : float or ndarray or None
        starting iterate; by default sqrt(max(a/b, EPSILON)) at every node

    Returns
    -------
    solution : GridSolution

    Raises
    ------
    SolverError
        when the iteration does not reach the tolerance in max_iters steps, or no damped step keeps q positive
    """
    conf = dict(DEFAULT_GRID)
    conf.update(grid_conf or {})
    x_range = conf.get('x_range') or potential.domain.x_range
    y_range = conf.get('y_range') or potential.domain.y_range
    nx, ny = int(conf['nx']), int(conf['ny'])
    x = np.linspace(x_range[0], x_range[1], nx)
    y = np.linspace(y_range[0], y_range[1], ny)
    hx, hy = x[1] - x[0], y[1] - y[0]

    start = time.time()
    a, b = node_coefficients(potential, Lambda, x, y)
    mask = boundary_mask(nx, ny)
    _check_hypotheses(a, b, mask)
    boundary = dirichlet_values(a, b)
    logger.info(f'coefficients on {nx} x {ny} nodes computed in {time.time() - start:.2f} s')

    if initial_guess is None:
        q = boundary.copy()
    else:
        q = np.broadcast_to(np.asarray(initial_guess, dtype=float), (nx, ny)).copy()
    q[mask] = boundary[mask]
    if np.any(q <= 0):
        raise SolverError('the initial guess must be positive')

    L = laplacian(nx, ny, hx, hy)
    interior = (~mask).ravel().astype(float)
    a_flat, b_flat, g_flat = a.ravel(), b.ravel(), boundary.ravel()
    on_boundary = mask.ravel()

    def residual(v):
        res = interior * (0.25 * (L @ v) + a_flat * v - b_flat * v ** 3)
        res[on_boundary] = v[on_boundary] - g_flat[on_boundary]
        return res

    def jacobian(v):
        diagonal = sparse.diags(interior * (a_flat - 3.0 * b_flat * v ** 2) + (1.0 - interior))
        return (sparse.diags(interior) @ (0.25 * L) + diagonal).tocsc()

    v = q.ravel()
    history = []
    for iteration in range(int(conf['max_iters']) + 1):
        res = residual(v)
        norm = float(np.max(np.abs(res)))
        history.append(norm)
        logger.debug(f'newton iteration {iteration}: residual {norm:.3e}')
        if norm <= conf['tol']:
            logger.info(f'logistic solve converged in {iteration} iterations, residual {norm:.3e}')
            return GridSolution(x, y, v.reshape(nx, ny), norm, iteration, history)
        if iteration == int(conf['max_iters']):
            break
        delta = spsolve(jacobian(v), -res)
        step = 1.0
        while step >= _MIN_STEP:
            trial = v + step * delta
            if np.all(trial > 0) and np.max(np.abs(residual(trial))) < (1.0 - 1e-4 * step) * norm:
                break
            step /= 2.0
        else:
            raise SolverError(f'damped Newton step failed to keep q positive and reduce the residual '
                              f'at iteration {iteration}', history=history)
        v = trial
    raise SolverError(f'Newton iteration did not converge in {conf["max_iters"]} iterations '
                      f'(residual {history[-1]:.3e})', history=history)


def constant_solution(potential, Lambda, samples, rtol=1e-8):
    """
    The constant solution q = sqrt(3 Lambda_0 / (4 Lambda)) of a Kahler-Einstein potential (rescaled for the
    tubular normalisation of f), or None when R / F_zzbar is not constant or Lambda_0 Lambda <= 0.
    """
    samples = list(samples)
    Lambda0 = einstein_constant(potential, samples, rtol)
    if Lambda0 is None or Lambda0 * Lambda <= 0:
        return None
    cr = build_cr_point(potential, samples[0])
    normalisation = cr.F_zzbar / logistic_coefficients(cr)['f2']
    return float(np.sqrt(3.0 * Lambda0 / (4.0 * Lambda) * normalisation))


def profile_residual(profile, samples):
    """Max-norm of the reduced lift equation over the samples."""
    worst = 0.0
    for z in samples:
        worst = max(worst, abs(evaluate_B(profile, z.real, z.imag)['reduced']))
    return float(worst)


def pde_residual(q, potential, Lambda, samples):
    """
    Max-norm of the reduced lift equation with p = f q at the samples.

    Parameters
    ----------
    q : float, GridSolution, OdeField, field with jet(x, y), or LiftProfile
        the conformal factor (a LiftProfile is used as is, e.g. for an explicit p)
    potential : Potential
        the CR structure
    Lambda : float
        cosmological constant
    samples : iterable of complex
        evaluation points; for a grid solution they must lie inside the grid

    Returns
    -------
    residual : float
    """
    profile = q if isinstance(q, LiftProfile) else build_profile(potential, q, Lambda)
    return profile_residual(profile, samples)
