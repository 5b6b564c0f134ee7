"""
cli.py
====================================
Command line interface: `check`, `lift`, `verify` and `catalog`.
Exit codes: 0 success, 1 check/solver/verdict failure, 2 configuration error.
"""
import argparse
import dataclasses
import logging
import sys
import pandas as pd
from SasakiLift.analyses.analysis_pipeline import (TEMPLATES, catalog_listing, initialize_analysis, run_check,
                                                   run_lift, run_verify)
from SasakiLift.errors import ConfigError
from SasakiLift.input_output.input_utils import read_run_config, validate_conf
from SasakiLift.input_output.output_utils import report_to_json

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _settings(args):
    settings = read_run_config(args.config) if args.config else validate_conf({})
    if args.seed is not None:
        settings = dataclasses.replace(settings, samples={**settings.samples, 'seed': args.seed})
    if args.out is not None:
        settings = dataclasses.replace(settings, output={**settings.output, 'directory': args.out})
    return settings


def _emit(report, args, table=None):
    if args.json:
        print(report_to_json(report))
    elif table is not None:
        print(table.to_string(index=False))


def cmd_check(args):
    settings = _settings(args)
    folders, potential = initialize_analysis(settings, args.root)
    result = run_check(settings, potential)
    table = pd.DataFrame([{'potential': potential.name, 'structure': result['structure_residual'],
                           'sasakian': result['sasakian']['max_residual'], 'lambda0': result['lambda0'],
                           'passed': result['passed']}])
    _emit(result, args, table)
    for failure in result['failures'][:1]:
        print(failure['error'], file=sys.stderr)
    return EXIT_OK if result['passed'] else EXIT_FAIL


def cmd_lift(args):
    settings = _settings(args)
    folders, potential = initialize_analysis(settings, args.root)
    report, profile = run_lift(settings, folders, potential)
    table = None
    if profile is not None:
        summary = report['summary']
        table = pd.DataFrame([{'potential': potential.name, 'mode': report['solver']['mode'], 'p': summary['p'],
                               'H(r=0)': summary['H_r0'], 'B': abs(summary['B']),
                               'residual': report['solver']['pde_residual']}])
    _emit(report, args, table)
    for failure in report['failures']:
        print(failure['error'], file=sys.stderr)
    return EXIT_OK if report['verdict'] == 'ok' else EXIT_FAIL


def cmd_verify(args):
    settings = _settings(args)
    folders, potential = initialize_analysis(settings, args.root)
    report = run_verify(settings, folders, potential)
    table = None
    if 'curvature' in report:
        residuals = report['curvature']['max_residuals']
        table = pd.DataFrame([{'potential': potential.name, 'tag': potential.tag,
                               'lambda_fit': report['curvature']['lambda_fit'],
                               'pattern': report['curvature']['pattern_residual'],
                               'phi': residuals['phi'], 'verdict': report['verdict']}])
    _emit(report, args, table)
    if 'source_inconsistency' in report:
        print(report['source_inconsistency'], file=sys.stderr)
    for failure in report['failures']:
        print(failure['error'], file=sys.stderr)
    return EXIT_FAIL if report['verdict'] == 'fail' else EXIT_OK


def cmd_catalog(args):
    listing = catalog_listing(args.seed or 0)
    if args.json:
        print(report_to_json({'catalog': listing.to_dict(orient='records'), 'templates': TEMPLATES}))
    else:
        print(listing.to_string(index=False))
        print()
        for name, template in TEMPLATES.items():
            print(f'{name} template: {template}')
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='run configuration (YAML)')
    common.add_argument('--json', action='store_true', help='print the report as JSON')
    common.add_argument('--out', help='results folder (overrides output.directory)')
    common.add_argument('--root', default='.', help='folder the results folder is created in')
    common.add_argument('--seed', type=int, help='sampling seed (overrides samples.seed)')
    common.add_argument('--verbose', '-v', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(prog='sasaki-lift',
                                     description='Shearfree quasi-Einstein lifts of Sasakian CR structures.')
    commands = parser.add_subparsers(dest='command', required=True)
    for name, func, text in (
            ('check', cmd_check, 'structure-equation and Sasakian checks of the potential'),
            ('lift', cmd_lift, 'solve for the conformal factor and assemble the lift'),
            ('verify', cmd_verify, 'finite-difference curvature verification of the lift'),
            ('catalog', cmd_catalog, 'list the catalog potentials')):
        command = commands.add_parser(name, parents=[common], help=text)
        command.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s', stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f'configuration error: {e}', file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
