"""
analysis_pipeline.py
====================================
The module responsible for the main loop of a run.
Will first check and initialize the potential and the output folder.
Will then check the CR structure (structure equation, Sasakian condition), solve for the conformal factor q with
the configured mode, assemble the lift, and verify it with the finite-difference curvature engine.
Every stage is run inside its own try/except; a failing stage is recorded in the report with its traceback,
and the run's verdict becomes 'fail'.

All of the settings used for this and the sub-analyses are set in the run configuration (confs/*.yml).
"""
import datetime
import logging
import os
import traceback
import numpy as np
import pandas as pd
from SasakiLift.analyses.curvature import (StencilConfig, gauge_reflection_check, quasi_einstein_check,
                                           shearfree_check)
from SasakiLift.analyses.logistic_solver import constant_solution, profile_residual, solve_logistic
from SasakiLift.analyses.tubular_ode import OdeField, solve_tubular
from SasakiLift.errors import ConfigError, GeometryError, SolverError
from SasakiLift.expressions.parser import parse_expression
from SasakiLift.geometry.cr_structure import (build_cr_point, check_sasakian, einstein_constant,
                                              verify_structure_equation)
from SasakiLift.geometry.lift import (MIRRORED_CONVENTION, PHASE_FLIPPED_CONVENTION, ExpressionField,
                                     assemble_metric, build_profile, compute_H, evaluate_B, evaluate_I_and_R33,
                                     explicit_profile, psi2_formula, structure_identities)
from SasakiLift.geometry.potentials import catalog
from SasakiLift.input_output.coordinate_utils import sample_plane, sample_spacetime
from SasakiLift.input_output.output_utils import create_folders, save_csv, save_json, save_settings
from SasakiLift.results_processing.csv_post_process import make_residual_csv

logger = logging.getLogger(__name__)

# tolerance of the curvature pattern when q comes from the grid solver (bicubic interpolation)
GRID_RICCI_TOL = 1e-3

# planar sample points used by the structure checks
CHECK_SAMPLES = 50

# samples of the reflection stage, which repeats the curvature check three times
REFLECTION_SAMPLES = 4


def initialize_analysis(settings, root_folder='.'):
    """
    Builds the potential of the configuration and creates the results folder, saving the settings there.

    Parameters
    ----------
    settings : RunConfig
        the validated configuration of this run
    root_folder : str
        the folder in which the results folder is created

    Returns
    -------
    folders : dict with str as keys and values
        paths of the root and results folders
    potential : Potential
        the potential of the run

    Raises
    ------
    ConfigError
        when the potential section cannot be turned into a potential
    """
    try:
        potential = settings.build_potential()
    except GeometryError as e:
        raise ConfigError(f'invalid potential: {e}') from e
    folders = create_folders(root_folder, settings)
    save_settings(settings, os.path.join(folders['results'], 'settings.yml'))
    logger.info(f'potential {potential.name} ({potential.tag}), results in {folders["results"]}')
    return folders, potential


def run_check(settings, potential):
    """
    Structure-equation and Sasakian checks over seeded sample points.

    Returns
    -------
    result : dict
        {'passed', 'structure_residual', 'sasakian', 'lambda0', 'samples', 'failures'}
    """
    tol = settings.tolerances['structure']
    samples = sample_plane(potential.domain, CHECK_SAMPLES, settings.samples['seed'])
    failures = []
    structure = 0.0
    starttime = datetime.datetime.now()

    for done, z in enumerate(samples, start=1):
        try:
            structure = max(structure, verify_structure_equation(potential, z))
        except GeometryError as e:
            failures.append({'z': [z.real, z.imag], 'error': str(e), 'traceback': traceback.format_exc()})
        if done % 10 == 0:
            eta = ((datetime.datetime.now() - starttime) / done) * (len(samples) - done)
            logger.info(f'structure check: {done}/{len(samples)} - eta: {eta}')

    sasakian = {'is_sasakian': False, 'max_residual': float('nan'), 'du_c': 0.0}
    lambda0 = None
    if not failures:
        try:
            sasakian = check_sasakian(potential, samples, tol)
            lambda0 = einstein_constant(potential, samples)
        except GeometryError as e:
            failures.append({'stage': 'sasakian', 'error': str(e), 'traceback': traceback.format_exc()})

    passed = not failures and structure < tol and sasakian['is_sasakian']
    logger.info(f'check of {potential.name}: structure residual {structure:.3e}, '
                f'sasakian residual {sasakian["max_residual"]:.3e}, passed: {passed}')
    return {'passed': bool(passed), 'structure_residual': float(structure), 'sasakian': sasakian,
            'lambda0': lambda0, 'samples': len(samples), 'failures': failures}


def build_lift(settings, potential):
    """
    Solves for the conformal factor with the configured mode and builds the lift profile.
    Mode 'auto' prefers the constant solution, then the ODE for tubular potentials, the closed-form p of the
    catalog when Lambda = 0, and the grid solver otherwise.

    Returns
    -------
    profile : LiftProfile
    solver : dict
        solver diagnostics: mode, and q, iterations, residual history or ODE data
    solution : GridSolution, OdeSolution or None
        the solved field, if any

    Raises
    ------
    SolverError
        when the mode has no solution (e.g. no constant solution) or the solver fails
    ConfigError
        for explicit_p without an expression
    """
    lift = settings.lift
    Lambda = lift['lambda']
    mode = lift['mode']
    planar = sample_plane(potential.domain, 16, settings.samples['seed'])

    if mode == 'auto':
        if Lambda != 0 and constant_solution(potential, Lambda, planar) is not None:
            mode = 'constant'
        elif potential.tubular:
            mode = 'ode'
        elif Lambda == 0 and potential.default_p is not None:
            mode = 'explicit_p'
        else:
            mode = 'pde'
        logger.info(f'mode auto resolved to {mode}')

    solver = {'mode': mode}
    solution = None
    if mode == 'constant':
        q = constant_solution(potential, Lambda, planar)
        if q is None:
            lambda0 = einstein_constant(potential, planar)
            lambda0 = 'not constant' if lambda0 is None else f'{lambda0:g}'
            raise SolverError(f'no constant solution: Lambda_0 = {lambda0}, Lambda = {Lambda:g}')
        solver['q'] = q
        profile = build_profile(potential, q, Lambda, label=f'{potential.name} constant q')
    elif mode == 'pde':
        grid_conf = dict(settings.grid)
        solution = solve_logistic(potential, Lambda, grid_conf, lift['initial_guess'])
        solver.update({'newton_iters': solution.newton_iters, 'residual_norm': solution.residual_norm,
                       'history': solution.history, 'nx': solution.nx, 'ny': solution.ny})
        profile = build_profile(potential, solution, Lambda, label=f'{potential.name} grid q')
    elif mode == 'ode':
        y_range = settings.ode['y_range'] or list(potential.domain.y_range)
        solution = solve_tubular(potential, Lambda, lift['q0'], lift['qp0'], y_range, settings.ode['step'],
                                 settings.ode['coupling'])
        solver.update({'steps': len(solution.y) - 1, 'step': solution.step, 'coupling': solution.coupling,
                       'q_min': float(solution.q.min()), 'q_max': float(solution.q.max())})
        profile = build_profile(potential, OdeField(solution), Lambda, label=f'{potential.name} ODE q')
    else:
        text = lift['p_expression'] or potential.default_p
        if text is None:
            raise ConfigError('explicit_p mode needs lift.p_expression for this potential')
        solver['p_expression'] = text
        profile = explicit_profile(potential, ExpressionField(parse_expression(text)), Lambda,
                                   label=f'{potential.name} p = {text}')

    solver['pde_residual'] = profile_residual(profile, planar)
    logger.info(f'lift profile {profile.label}: reduced-equation residual {solver["pde_residual"]:.3e}')
    if (mode == 'explicit_p' and solver['p_expression'] == potential.default_p
            and solver['pde_residual'] > settings.tolerances['residual']):
        solver['source_inconsistency'] = (
            f'the catalog p = {potential.default_p} of {potential.name} leaves the reduced lift equation with '
            f'residual {solver["pde_residual"]:.3e}; a failing verdict belongs to this p, not to a solver')
        logger.warning(solver['source_inconsistency'])
    return profile, solver, solution


def profile_summary(profile, z):
    """Spot values of the lift data at z: p, m, X, Q, T, H(0), Psi2(0), B."""
    point = profile.point(z.real, z.imag)
    B = evaluate_B(profile, z.real, z.imag)
    return {
        'x': z.real, 'y': z.imag, 'p': point.p, 'm': point.m, 'X': point.X, 'Q': point.Q, 'T': point.T,
        'H_r0': compute_H(point, 0.0), 'psi2_r0': psi2_formula(point, 0.0), 'B': B['B'],
        'reduced': B['reduced'], 'R': build_cr_point(profile.potential, z).R,
    }


def _solution_frame(solution, profile, samples):
    if solution is not None:
        return solution.to_frame()
    rows = []
    for z in samples:
        point = profile.point(z.real, z.imag)
        q = point.p / profile.f_jet(point.cr).value.real
        rows.append({'x': z.real, 'y': z.imag, 'q': q, 'p': point.p})
    return pd.DataFrame(rows, columns=['x', 'y', 'q', 'p'])


def run_lift(settings, folders, potential):
    """
    Solves and assembles the lift, writes the q table and returns the lift report.

    Returns
    -------
    report : dict
        {'tag', 'potential', 'solver', 'summary', 'verdict': 'ok' or 'fail', 'failures'}
    profile : LiftProfile or None
    """
    report = {'tag': potential.tag, 'potential': potential.name, 'failures': []}
    try:
        profile, solver, solution = build_lift(settings, potential)
        report['solver'] = solver
        planar = sample_plane(potential.domain, settings.samples['count'], settings.samples['seed'])
        report['summary'] = profile_summary(profile, planar[0])
        if settings.output['csv']:
            save_csv(_solution_frame(solution, profile, planar), os.path.join(folders['results'], 'q.csv'))
        report['verdict'] = 'ok'
        return report, profile
    except ConfigError:
        raise
    except (GeometryError, SolverError) as e:
        report['solver'] = {'mode': settings.lift['mode'], 'history': getattr(e, 'history', None)}
        report['failures'].append({'stage': 'lift', 'error': str(e), 'traceback': traceback.format_exc()})
        report['verdict'] = 'fail'
        logger.error(f'lift failed: {e}')
        return report, None


def formula_checks(profile, samples, h=1e-3):
    """
    Formula-layer identities at the samples: B, d m + 3 c m, the reality of H, and Ric_33 from its closed form.
    """
    B_max, dm_max, consistency = 0.0, 0.0, 0.0
    ric33 = []
    for X in samples:
        x, y, _, r = X
        B = evaluate_B(profile, x, y)
        B_max = max(B_max, abs(B['B']))
        consistency = max(consistency, B['consistency'])
        dm_max = max(dm_max, structure_identities(profile, x, y)['dm'])
        ric33.append(evaluate_I_and_R33(profile, x, y, r, h)['ric33_rhs'])
    return {'B': float(B_max), 'B_consistency': float(consistency), 'dm': float(dm_max), 'ric33_rhs': ric33}


def convention_checks(profile, samples, cfg=StencilConfig(), tol=1e-4):
    """
    The lift against two metrics assembled on their own: the mirrored chart r -> -r, which must reproduce the
    frame curvature and the verdict at (x, y, u, -r), and the phase-flipped W = i X e^{ir} + Y without the
    reflection, which is a lift only where X vanishes.

    Returns
    -------
    result : dict
        {'ricci', 'psi2': max differences against the mirrored chart, 'verdict', 'mirrored_verdict',
        'phase_flipped_verdict', 'phase_flipped_pattern', 'passed'}
    """
    metric = assemble_metric(profile)
    mirrored = assemble_metric(profile, convention=MIRRORED_CONVENTION)
    flipped = assemble_metric(profile, convention=PHASE_FLIPPED_CONVENTION)
    mirrored_samples = [(x, y, u, -r) for x, y, u, r in samples]

    result = gauge_reflection_check(metric, mirrored, samples, cfg)
    verdict = quasi_einstein_check(metric, profile.Lambda, samples, cfg, tol).verdict
    mirrored_report = quasi_einstein_check(mirrored, profile.Lambda, mirrored_samples, cfg, tol)
    flipped_report = quasi_einstein_check(flipped, profile.Lambda, samples, cfg, tol)
    result.update({'verdict': verdict, 'mirrored_verdict': mirrored_report.verdict,
                   'phase_flipped_verdict': flipped_report.verdict,
                   'phase_flipped_pattern': flipped_report.pattern_residual})
    result['passed'] = bool(result['ricci'] < tol and result['psi2'] < tol and mirrored_report.verdict == verdict)
    logger.info(f'reflection of {profile.label}: verdicts {verdict} / {mirrored_report.verdict} (mirrored), '
                f'phase-flipped W gives {flipped_report.verdict}')
    return result


def run_verify(settings, folders, potential, profile=None):
    """
    The full verification of a lift: quasi-Einstein pattern and speciality, shearfree congruence, the mirrored
    chart r -> -r and the phase-flipped W, and the formula layer, on seeded (x, y, u, r) samples. A catalog p
    that does not solve the reduced lift equation is labelled in report['source_inconsistency'].

    Returns
    -------
    report : dict
        the run report; report['verdict'] is 'einstein', 'quasi_einstein' or 'fail'
    """
    lift_report = None
    if profile is None:
        lift_report, profile = run_lift(settings, folders, potential)
        if profile is None:
            return {**lift_report, 'verdict': 'fail'}

    tol = settings.tolerances['ricci']
    if profile.q_field is not None and hasattr(profile.q_field, 'nx'):
        tol = max(tol, GRID_RICCI_TOL)
    cfg = StencilConfig(settings.stencil['h'], settings.stencil['richardson'])
    samples = sample_spacetime(potential.domain, settings.samples['count'], settings.samples['seed'],
                               settings.samples['u_range'], settings.samples['r_range'])
    metric = assemble_metric(profile)
    report = {'tag': potential.tag, 'potential': potential.name, 'lambda': profile.Lambda,
              'lift': lift_report, 'failures': []}
    note = ((lift_report or {}).get('solver') or {}).get('source_inconsistency')
    if note:
        report['source_inconsistency'] = note
    stages = {}

    ######################################
    # Curvature
    ######################################

    try:
        curvature = quasi_einstein_check(metric, profile.Lambda, samples, cfg, tol,
                                         lambda X: psi2_formula(profile.point(X[0], X[1]), X[3]))
        stages['curvature'] = curvature.to_dict()
    except Exception as e:
        report['failures'].append({'stage': 'curvature', 'error': str(e), 'traceback': traceback.format_exc()})

    ######################################
    # Shearfree congruence
    ######################################

    try:
        shearfree = shearfree_check(metric, samples, cfg)
        expected = [float(np.tan(X[3] / 2.0)) for X in samples]
        shearfree['rho_error'] = float(max(abs(a - b) for a, b in zip(shearfree['rho'], expected)))
        shearfree['passed'] = bool(shearfree['residual'] < settings.tolerances['shearfree']
                                   and shearfree['rho_error'] < settings.tolerances['shearfree'])
        stages['shearfree'] = shearfree
    except Exception as e:
        report['failures'].append({'stage': 'shearfree', 'error': str(e), 'traceback': traceback.format_exc()})

    ######################################
    # Reflection r -> -r
    ######################################

    try:
        stages['reflection'] = convention_checks(profile, samples[:REFLECTION_SAMPLES], cfg, tol)
    except Exception as e:
        report['failures'].append({'stage': 'reflection', 'error': str(e), 'traceback': traceback.format_exc()})

    ######################################
    # Formula layer
    ######################################

    try:
        formula = formula_checks(profile, samples, cfg.h)
        if 'curvature' in stages:
            fd = [sample['ric']['33'][0] for sample in stages['curvature']['samples']]
            formula['ric33_fd'] = fd
            formula['ric33_difference'] = float(max(abs(a - b) for a, b in zip(fd, formula['ric33_rhs'])))
        stages['formula'] = formula
    except Exception as e:
        report['failures'].append({'stage': 'formula', 'error': str(e), 'traceback': traceback.format_exc()})

    ######################################
    # Verdict
    ######################################

    report.update(stages)
    verdict = stages['curvature']['verdict'] if 'curvature' in stages else 'fail'
    if report['failures'] or not stages.get('shearfree', {}).get('passed', False):
        verdict = 'fail'
    report['verdict'] = verdict
    logger.info(f'verification of {profile.label}: verdict {verdict}')

    json_path = os.path.join(folders['results'], settings.output['json'])
    save_json(report, json_path)
    if settings.output['csv'] and 'curvature' in stages:
        make_residual_csv(stages['curvature'], folders['results'])
    return report


def catalog_listing(seed=0):
    """
    The catalog as a table: name, F, admissible region, Lambda_0 where constant, tag and description.
    """
    rows = []
    for potential in catalog():
        samples = sample_plane(potential.domain, 16, seed)
        try:
            lambda0 = einstein_constant(potential, samples)
        except GeometryError:
            lambda0 = None
        rows.append({'name': potential.name, 'F': potential.expr.text, 'domain': potential.domain.describe(),
                     'lambda0': lambda0, 'tag': potential.tag, 'description': potential.description})
    return pd.DataFrame(rows, columns=['name', 'F', 'domain', 'lambda0', 'tag', 'description'])


TEMPLATES = {
    'tubular': "potential: {kind: tubular, expression: 'exp(y)'}  # any F(y) with F_yy > 0",
    'custom': "potential: {kind: custom, expression: 'x^2 + y^2 + x^4', domain: {x_range: [-1, 1], "
              "y_range: [-1, 1]}}",
}
