"""
curvature.py
====================================
Finite-difference curvature of a metric field on (x, y, u, r): Christoffel symbols, Riemann, Ricci and Weyl
tensors from central differences of the metric components (Richardson-extrapolated), their components in the
null frame e_1..e_4 of the field, and the checks built on them:

  - quasi-Einstein pattern Ric = Lambda g + Phi lambda^2 in the frame,
  - shearfree congruence k = d_r (L_k g restricted to k-perp proportional to g),
  - algebraic speciality (D0 = C_4141, D1 = C_4341 vanish, Psi2 = C_4132 does not),
  - agreement of a metric with an independently assembled copy in the mirrored chart r -> -r.

Failures are reported in the CurvatureReport, never raised.
"""
import logging
from dataclasses import dataclass, field
import numpy as np
from SasakiLift.errors import GeometryError

logger = logging.getLogger(__name__)

# frame components of Ric that vanish for Ric = Lambda g + Phi lambda^2 (indices 1-based)
ZERO_COMPONENTS = ('11', '22', '13', '14', '23', '24', '44')
LAMBDA_COMPONENTS = ('12', '34')


@dataclass(frozen=True)
class StencilConfig:
    """
    Parameters
    ----------
    h : float
        base step; the step in coordinate i is h max(1, |X_i|)
    richardson : bool
        combine steps h and h/2 to cancel the leading error term
    guard : float
        guard band |cos(r/2)| >= guard for lift metrics
    """
    h: float = 1e-3
    richardson: bool = True
    guard: float = 1e-3

    def __post_init__(self):
        if self.h <= 0:
            raise GeometryError(f'stencil step must be positive, got {self.h}')

    def steps(self, X):
        return self.h * np.maximum(1.0, np.abs(np.asarray(X, dtype=float)))


def _evaluate(metric, X, moves):
    Y = np.array(X, dtype=float)
    for index, delta in moves:
        Y[index] += delta
    return metric.metric(Y)


def _first_derivatives(metric, X, steps):
    dg = np.empty((4, 4, 4))
    for k in range(4):
        h = steps[k]
        dg[k] = (_evaluate(metric, X, [(k, h)]) - _evaluate(metric, X, [(k, -h)])) / (2.0 * h)
    return dg


def _second_derivatives(metric, X, steps):
    g0 = metric.metric(np.asarray(X, dtype=float))
    ddg = np.empty((4, 4, 4, 4))
    for k in range(4):
        h = steps[k]
        ddg[k, k] = (_evaluate(metric, X, [(k, h)]) - 2.0 * g0 + _evaluate(metric, X, [(k, -h)])) / h ** 2
        for l in range(k + 1, 4):
            hl = steps[l]
            mixed = (_evaluate(metric, X, [(k, h), (l, hl)]) - _evaluate(metric, X, [(k, h), (l, -hl)])
                     - _evaluate(metric, X, [(k, -h), (l, hl)]) + _evaluate(metric, X, [(k, -h), (l, -hl)]))
            ddg[k, l] = ddg[l, k] = mixed / (4.0 * h * hl)
    return ddg


def metric_derivatives(metric, X, cfg=StencilConfig()):
    """
    First and second coordinate derivatives of the metric components at X.

    Returns
    -------
    dg : ndarray (4, 4, 4)
        dg[k, i, j] = d_k g_ij
    ddg : ndarray (4, 4, 4, 4)
        ddg[k, l, i, j] = d_k d_l g_ij
    """
    steps = cfg.steps(X)
    dg = _first_derivatives(metric, X, steps)
    ddg = _second_derivatives(metric, X, steps)
    if cfg.richardson:
        dg = (4.0 * _first_derivatives(metric, X, steps / 2) - dg) / 3.0
        ddg = (4.0 * _second_derivatives(metric, X, steps / 2) - ddg) / 3.0
    return dg, ddg


def _metric_and_inverse(metric, X):
    g = metric.metric(np.asarray(X, dtype=float))
    det = np.linalg.det(g)
    if abs(det) < 1e-8:
        raise GeometryError(f'degenerate metric at {tuple(X)}: det g = {det:.3g}')
    return g, np.linalg.inv(g)


def _christoffel(g_inv, dg):
    # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    gamma = 0.5 * (np.einsum('ad,bdc->abc', g_inv, dg) + np.einsum('ad,cdb->abc', g_inv, dg)
                   - np.einsum('ad,dbc->abc', g_inv, dg))
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def christoffel(metric, X, cfg=StencilConfig()):
    """Christoffel symbols Gamma[a, b, c] = Gamma^a_bc at X."""
    _, g_inv = _metric_and_inverse(metric, X)
    dg, _ = metric_derivatives(metric, X, cfg)
    return _christoffel(g_inv, dg)


@dataclass
class CurvatureAtPoint:
    """Coordinate tensors at one point; riemann[r, s, m, n] = R_rsmn, ricci[s, n] = g^rm R_rsmn."""
    X: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl: np.ndarray


def curvature_at(metric, X, cfg=StencilConfig()):
    """All coordinate curvature tensors at X from one set of finite differences."""
    X = np.asarray(X, dtype=float)
    g, g_inv = _metric_and_inverse(metric, X)
    dg, ddg = metric_derivatives(metric, X, cfg)
    gamma = _christoffel(g_inv, dg)
    riemann = riemann_from_derivatives(g, gamma, ddg)
    ricci = np.einsum('rm,rsmn->sn', g_inv, riemann)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum('sn,sn->', g_inv, ricci))
    weyl = weyl_tensor(g, riemann, ricci, scalar)
    return CurvatureAtPoint(X, g, g_inv, gamma, riemann, ricci, scalar, weyl)


def riemann_from_derivatives(g, gamma, ddg):
    """
    R_rsmn = 1/2 (g_rn,sm + g_sm,rn - g_rm,sn - g_sn,rm) + g_zh (Gamma^z_sm Gamma^h_rn - Gamma^z_sn Gamma^h_rm).
    """
    second = 0.5 * (np.einsum('smrn->rsmn', ddg) + np.einsum('rnsm->rsmn', ddg)
                    - np.einsum('snrm->rsmn', ddg) - np.einsum('rmsn->rsmn', ddg))
    quadratic = (np.einsum('zh,zsm,hrn->rsmn', g, gamma, gamma)
                 - np.einsum('zh,zsn,hrm->rsmn', g, gamma, gamma))
    return second + quadratic


def riemann(metric, X, cfg=StencilConfig()):
    return curvature_at(metric, X, cfg).riemann


def weyl_tensor(g, riemann_tensor, ricci, scalar):
    """Weyl tensor in four dimensions."""
    gr = (np.einsum('ac,bd->abcd', g, ricci) - np.einsum('ad,bc->abcd', g, ricci)
          - np.einsum('bc,ad->abcd', g, ricci) + np.einsum('bd,ac->abcd', g, ricci))
    gg = np.einsum('ac,bd->abcd', g, g) - np.einsum('ad,bc->abcd', g, g)
    return riemann_tensor - 0.5 * gr + scalar / 6.0 * gg


def symmetry_residuals(point):
    """Max deviations from the Riemann index symmetries, the first Bianchi identity and Weyl trace-freeness."""
    R = point.riemann
    antisymmetry = max(np.max(np.abs(R + R.transpose(1, 0, 2, 3))), np.max(np.abs(R + R.transpose(0, 1, 3, 2))))
    pair = np.max(np.abs(R - R.transpose(2, 3, 0, 1)))
    bianchi = np.max(np.abs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)))
    weyl_trace = np.max(np.abs(np.einsum('ac,abcd->bd', point.g_inv, point.weyl)))
    return {'antisymmetry': float(antisymmetry), 'pair': float(pair), 'bianchi': float(bianchi),
            'weyl_trace': float(weyl_trace)}


def metric_compatibility(metric, X, cfg=StencilConfig()):
    """max |nabla_k g_ij| with the finite-difference connection."""
    g, g_inv = _metric_and_inverse(metric, X)
    dg, _ = metric_derivatives(metric, X, cfg)
    gamma = _christoffel(g_inv, dg)
    nabla = dg - np.einsum('lki,lj->kij', gamma, g) - np.einsum('lkj,il->kij', gamma, g)
    return float(np.max(np.abs(nabla)))


def frame_components(tensor, frame):
    """Components of a covariant 2- or 4-tensor in the (complex) frame given by rows."""
    if tensor.ndim == 2:
        return frame @ tensor @ frame.T
    return np.einsum('abcd,ia,jb,kc,ld->ijkl', tensor, frame, frame, frame, frame)


def ricci_frame(metric, X, cfg=StencilConfig(), point=None):
    """Ric_ab = Ric(e_a, e_b) in the frame of the metric field (a 4 x 4 complex array, 0-based)."""
    point = point or curvature_at(metric, X, cfg)
    return frame_components(point.ricci, metric.frame(X))


def _weyl_component(weyl, frame, a, b, c, d):
    return complex(np.einsum('abcd,a,b,c,d->', weyl, frame[a - 1], frame[b - 1], frame[c - 1], frame[d - 1]))


def weyl_speciality(metric, X, cfg=StencilConfig(), point=None):
    """{'D0': C_4141, 'D1': C_4341, 'Psi2': C_4132} in the frame of the metric field."""
    point = point or curvature_at(metric, X, cfg)
    frame = metric.frame(X)
    return {'D0': _weyl_component(point.weyl, frame, 4, 1, 4, 1),
            'D1': _weyl_component(point.weyl, frame, 4, 3, 4, 1),
            'Psi2': _weyl_component(point.weyl, frame, 4, 1, 3, 2)}


def is_algebraically_special(speciality, tol):
    """Type II or D: D0 and D1 vanish while Psi2 does not."""
    return abs(speciality['D0']) < tol and abs(speciality['D1']) < tol and abs(speciality['Psi2']) > tol


def _complex_pair(value):
    return [float(np.real(value)), float(np.imag(value))]


@dataclass
class CurvatureReport:
    """
    Per-sample frame Ricci components, Phi = P^2 Ric_33, the speciality components, the fitted Lambda,
    the max residuals of the quasi-Einstein pattern and a verdict ('einstein', 'quasi_einstein' or 'fail').
    """
    samples: list
    lambda_fit: float
    lambda_config: float
    max_residuals: dict
    verdict: str
    tolerance: float
    petrov_special: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def pattern_residual(self):
        """Max residual of the frame components fixed by Ric = Lambda g + Phi lambda^2."""
        return max(self.max_residuals[key] for key in ZERO_COMPONENTS + LAMBDA_COMPONENTS)

    def to_dict(self):
        result = {
            'samples': self.samples,
            'lambda_fit': self.lambda_fit,
            'lambda': self.lambda_config,
            'max_residuals': self.max_residuals,
            'pattern_residual': self.pattern_residual,
            'verdict': self.verdict,
            'tolerance': self.tolerance,
            'petrov_special': self.petrov_special,
        }
        result.update(self.extras)
        return result


def _sample_record(X, ric, phi, speciality):
    x, y, u, r = (float(v) for v in X)
    components = {f'{a + 1}{b + 1}': _complex_pair(ric[a, b]) for a in range(4) for b in range(a, 4)}
    return {'x': x, 'y': y, 'u': u, 'r': r, 'ric': components, 'phi': float(np.real(phi)),
            'd0': _complex_pair(speciality['D0']), 'd1': _complex_pair(speciality['D1']),
            'psi2': _complex_pair(speciality['Psi2'])}


def quasi_einstein_check(metric, Lambda, samples, cfg=StencilConfig(), tol=1e-4, psi2_reference=None):
    """
    Checks Ric = Lambda g + Phi lambda^2 in the frame at every sample.

    Parameters
    ----------
    metric : MetricField
        a field with frame(X) and P(X)
    Lambda : float
        the configured cosmological constant
    samples : iterable of 4-tuples
        (x, y, u, r) points
    cfg : StencilConfig
        finite-difference settings
    tol : float
        threshold on the pattern residuals and on Phi for the 'einstein' verdict
    psi2_reference : callable or None
        X -> closed-form Psi2; if given, the ratio of the finite-difference value to it is reported

    Returns
    -------
    report : CurvatureReport
    """
    records = []
    residuals = {key: 0.0 for key in ZERO_COMPONENTS + LAMBDA_COMPONENTS}
    residuals.update({'hermitian': 0.0, 'bianchi': 0.0, 'weyl_trace': 0.0, 'scalar_consistency': 0.0,
                      'phi': 0.0})
    lambda_values = []
    special = True
    ratios = []
    for X in samples:
        X = np.asarray(X, dtype=float)
        point = curvature_at(metric, X, cfg)
        ric = ricci_frame(metric, X, cfg, point)
        speciality = weyl_speciality(metric, X, cfg, point)
        phi = metric.P(X) ** 2 * ric[2, 2].real
        for key in ZERO_COMPONENTS:
            residuals[key] = max(residuals[key], abs(ric[int(key[0]) - 1, int(key[1]) - 1]))
        for key in LAMBDA_COMPONENTS:
            value = ric[int(key[0]) - 1, int(key[1]) - 1]
            lambda_values.append(value.real)
            residuals[key] = max(residuals[key], abs(value - Lambda))
        residuals['hermitian'] = max(residuals['hermitian'], abs(ric[0, 1] - np.conj(ric[1, 0])))
        symmetry = symmetry_residuals(point)
        residuals['bianchi'] = max(residuals['bianchi'], symmetry['bianchi'])
        residuals['weyl_trace'] = max(residuals['weyl_trace'], symmetry['weyl_trace'])
        frame_scalar = 2.0 * (ric[0, 1] + ric[2, 3]).real
        residuals['scalar_consistency'] = max(residuals['scalar_consistency'], abs(frame_scalar - point.scalar))
        residuals['phi'] = max(residuals['phi'], abs(phi))
        special = special and is_algebraically_special(speciality, tol)
        record = _sample_record(X, ric, phi, speciality)
        if psi2_reference is not None:
            reference = psi2_reference(X)
            record['psi2_formula'] = _complex_pair(reference)
            if abs(reference) > 0:
                ratios.append(speciality['Psi2'] / reference)
        records.append(record)
        logger.debug(f'curvature at {tuple(X)}: Ric12 = {ric[0, 1].real:.6g}, Ric34 = {ric[2, 3].real:.6g}, '
                     f'Phi = {phi:.6g}')

    residuals = {key: float(value) for key, value in residuals.items()}
    pattern = max(residuals[key] for key in ZERO_COMPONENTS + LAMBDA_COMPONENTS)
    if pattern >= tol:
        verdict = 'fail'
    elif residuals['phi'] < tol:
        verdict = 'einstein'
    else:
        verdict = 'quasi_einstein'
    extras = {}
    if ratios:
        # spreads are relative to the mean ratio; the phase of Psi2 depends on the frame, its modulus does not
        ratios = np.asarray(ratios)
        mean = np.mean(ratios)
        moduli = np.abs(ratios)
        extras['psi2_ratio'] = _complex_pair(mean)
        extras['psi2_ratio_spread'] = float(np.max(np.abs(ratios - mean)) / max(abs(mean), 1e-300))
        extras['psi2_modulus_ratio'] = float(np.mean(moduli))
        extras['psi2_modulus_ratio_spread'] = float(np.max(np.abs(moduli - np.mean(moduli)))
                                                    / max(np.mean(moduli), 1e-300))
    report = CurvatureReport(records, float(np.mean(lambda_values)) if lambda_values else float('nan'),
                             float(Lambda), residuals, verdict, float(tol), bool(special and records), extras)
    logger.info(f'quasi-Einstein check on {len(records)} samples: verdict {verdict}, '
                f'max pattern residual {pattern:.3e}, fitted Lambda {report.lambda_fit:.6g}')
    return report


def shearfree_check(metric, samples, cfg=StencilConfig()):
    """
    L_k g for k = d_r is d_r g_ij; on k-perp = span(e_1, e_2, e_4) it must equal rho g.

    Returns
    -------
    result : dict
        {'rho': [rho per sample], 'residual': max |(L_k g)(e_a, e_b) - rho g(e_a, e_b)|, 'null': max |g(k, k)|}
    """
    rhos = []
    residual = 0.0
    null = 0.0
    for X in samples:
        X = np.asarray(X, dtype=float)
        steps = cfg.steps(X)
        h = steps[3]

        def d_r(step):
            return (_evaluate(metric, X, [(3, step)]) - _evaluate(metric, X, [(3, -step)])) / (2.0 * step)

        lie = (4.0 * d_r(h / 2) - d_r(h)) / 3.0 if cfg.richardson else d_r(h)
        frame = metric.frame(X)[[0, 1, 3]]
        projected = frame @ lie @ frame.T
        gram = frame @ metric.metric(X) @ frame.T
        rho = projected[0, 1].real / gram[0, 1].real
        rhos.append(float(rho))
        residual = max(residual, float(np.max(np.abs(projected - rho * gram))))
        null = max(null, abs(float(metric.metric(X)[3, 3])))
    return {'rho': rhos, 'residual': residual, 'null': null}


def gauge_reflection_check(metric, reflected, samples, cfg=StencilConfig()):
    """
    Compares frame Ricci components and |Psi2| of a metric at (x, y, u, r) with those of a second metric at
    (x, y, u, -r). The second metric is meant to be assembled on its own in the mirrored chart, so agreement
    checks that both charts describe the same geometry.

    Returns
    -------
    result : dict
        {'ricci': max difference of Ric_ab, 'psi2': max difference of |Psi2|}
    """
    ricci_diff = 0.0
    psi2_diff = 0.0
    for X in samples:
        X = np.asarray(X, dtype=float)
        mirrored = X.copy()
        mirrored[3] = -mirrored[3]
        point = curvature_at(metric, X, cfg)
        point_reflected = curvature_at(reflected, mirrored, cfg)
        ric = ricci_frame(metric, X, cfg, point)
        ric_reflected = ricci_frame(reflected, mirrored, cfg, point_reflected)
        ricci_diff = max(ricci_diff, float(np.max(np.abs(ric - ric_reflected))))
        psi2 = weyl_speciality(metric, X, cfg, point)['Psi2']
        psi2_reflected = weyl_speciality(reflected, mirrored, cfg, point_reflected)['Psi2']
        psi2_diff = max(psi2_diff, abs(abs(psi2) - abs(psi2_reflected)))
    return {'ricci': ricci_diff, 'psi2': float(psi2_diff)}
