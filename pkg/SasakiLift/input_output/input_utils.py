"""
input_utils.py
====================================
The module used for input.
Loads run configurations (YAML) from the hard drive, fills in defaults and validates them,
and turns the potential section into a Potential.
"""
import copy
import os
from dataclasses import dataclass, asdict
import yaml
from SasakiLift.analyses.tubular_ode import CONSISTENT_COUPLING
from SasakiLift.errors import ConfigError, ExpressionError
from SasakiLift.expressions.parser import parse_expression
from SasakiLift.geometry.lift import R_MAX
from SasakiLift.geometry.potentials import Domain, catalog_names, make_potential

MODES = ('auto', 'constant', 'pde', 'ode', 'explicit_p')

DEFAULTS = {
    'potential': {'kind': 'fubini_study', 'expression': None, 'phi': None, 'domain': None},
    'lift': {'lambda': 1.5, 'mode': 'auto', 'q0': 1.0, 'qp0': 0.0, 'p_expression': None, 'initial_guess': None},
    'grid': {'nx': 33, 'ny': 33, 'tol': 1e-9, 'max_iters': 50},
    'ode': {'y_range': None, 'step': 0.01, 'coupling': CONSISTENT_COUPLING},
    'samples': {'count': 8, 'seed': 0, 'u_range': [-1.0, 1.0], 'r_range': [-2.0, 2.0]},
    'tolerances': {'structure': 1e-9, 'ricci': 1e-4, 'speciality': 1e-5, 'shearfree': 1e-6, 'residual': 1e-6},
    'stencil': {'h': 1e-3, 'richardson': True},
    'output': {'directory': 'results', 'json': 'report.json', 'csv': True},
}


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration, one dictionary per section."""
    potential: dict
    lift: dict
    grid: dict
    ode: dict
    samples: dict
    tolerances: dict
    stencil: dict
    output: dict

    def to_dict(self):
        return copy.deepcopy(asdict(self))

    def build_potential(self):
        """The Potential described by the potential section."""
        section = self.potential
        domain = None
        if section['domain'] is not None:
            box = section['domain']
            domain = Domain(tuple(box['x_range']), tuple(box['y_range']), box.get('radius'))
        phi = tuple(section['phi']) if section['phi'] is not None else None
        return make_potential(section['kind'], section['expression'], domain, phi)


def load_conf(path):
    """
    Reads a YAML configuration from the hard drive.

    Raises
    ------
    ConfigError
        when the file is missing or is not valid YAML
    """
    conf_dict = {}
    if not os.path.exists(path):
        raise ConfigError(f'configuration file {path} does not exist')
    try:
        with open(path, "r", encoding="utf-8") as yaml_file:
            conf_dict = yaml.safe_load(yaml_file)
    except yaml.YAMLError as e:
        raise ConfigError(f'configuration file {path} is not valid YAML: {e}') from e
    return conf_dict or {}


def _number(section, key, value, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{section}.{key} must be a number, got {value!r}')
    if integer and int(value) != value:
        raise ConfigError(f'{section}.{key} must be an integer, got {value!r}')
    if positive and value <= 0:
        raise ConfigError(f'{section}.{key} must be positive, got {value!r}')
    return int(value) if integer else float(value)


def _interval(section, key, value):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f'{section}.{key} must be a list [low, high], got {value!r}')
    low, high = (_number(section, key, v) for v in value)
    if not low < high:
        raise ConfigError(f'{section}.{key} must satisfy low < high, got {value!r}')
    return [low, high]


def validate_conf(conf_dict):
    """
    Fills in defaults and validates a configuration dictionary.

    Parameters
    ----------
    conf_dict : dict
        the configuration as loaded by load_conf (sections may be missing)

    Returns
    -------
    conf : RunConfig
        the validated configuration

    Raises
    ------
    ConfigError
        on unknown sections or keys, wrong types, non-positive tolerances, an r-range beyond the guard band,
        or an unknown mode or potential kind
    """
    if not isinstance(conf_dict, dict):
        raise ConfigError('a configuration must be a mapping of sections')
    unknown = set(conf_dict) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f'unknown configuration sections: {sorted(unknown)}')

    conf = copy.deepcopy(DEFAULTS)
    for section, values in conf_dict.items():
        if values is None:
            continue
        if not isinstance(values, dict):
            raise ConfigError(f'section {section} must be a mapping')
        unknown = set(values) - set(DEFAULTS[section])
        if unknown:
            raise ConfigError(f'unknown keys in section {section}: {sorted(unknown)}')
        conf[section].update(values)

    potential = conf['potential']
    if potential['kind'] not in catalog_names() + ['custom']:
        raise ConfigError(f'unknown potential kind {potential["kind"]!r}')
    if potential['phi'] is not None and (not isinstance(potential['phi'], (list, tuple)) or len(potential['phi']) != 2):
        raise ConfigError('potential.phi must be a list [Re phi, Im phi] of expressions')
    if potential['domain'] is not None:
        box = potential['domain']
        if not isinstance(box, dict) or not {'x_range', 'y_range'} <= set(box):
            raise ConfigError('potential.domain needs x_range and y_range')
        potential['domain'] = {'x_range': _interval('potential.domain', 'x_range', box['x_range']),
                               'y_range': _interval('potential.domain', 'y_range', box['y_range'])}
        if box.get('radius') is not None:
            potential['domain']['radius'] = _number('potential.domain', 'radius', box['radius'], positive=True)

    lift = conf['lift']
    if lift['mode'] not in MODES:
        raise ConfigError(f'lift.mode must be one of {MODES}, got {lift["mode"]!r}')
    lift['lambda'] = _number('lift', 'lambda', lift['lambda'])
    lift['q0'] = _number('lift', 'q0', lift['q0'], positive=True)
    lift['qp0'] = _number('lift', 'qp0', lift['qp0'])
    if lift['initial_guess'] is not None:
        lift['initial_guess'] = _number('lift', 'initial_guess', lift['initial_guess'], positive=True)
    texts = [potential['expression'], lift['p_expression']] + list(potential['phi'] or [])
    for text in texts:
        if text is None:
            continue
        try:
            parse_expression(str(text))
        except ExpressionError as e:
            raise ConfigError(f'invalid expression {text!r}: {e}') from e

    grid = conf['grid']
    for key in ('nx', 'ny', 'max_iters'):
        grid[key] = _number('grid', key, grid[key], positive=True, integer=True)
    if grid['nx'] < 5 or grid['ny'] < 5:
        raise ConfigError('grid.nx and grid.ny must be at least 5')
    grid['tol'] = _number('grid', 'tol', grid['tol'], positive=True)

    ode = conf['ode']
    if ode['y_range'] is not None:
        ode['y_range'] = _interval('ode', 'y_range', ode['y_range'])
    ode['step'] = _number('ode', 'step', ode['step'], positive=True)
    ode['coupling'] = _number('ode', 'coupling', ode['coupling'])

    samples = conf['samples']
    samples['count'] = _number('samples', 'count', samples['count'], positive=True, integer=True)
    samples['seed'] = _number('samples', 'seed', samples['seed'], integer=True)
    samples['u_range'] = _interval('samples', 'u_range', samples['u_range'])
    samples['r_range'] = _interval('samples', 'r_range', samples['r_range'])
    if max(abs(v) for v in samples['r_range']) > R_MAX:
        raise ConfigError(f'samples.r_range must lie within |r| <= {R_MAX} (guard band of the P singularity)')

    for key, value in conf['tolerances'].items():
        conf['tolerances'][key] = _number('tolerances', key, value, positive=True)

    conf['stencil']['h'] = _number('stencil', 'h', conf['stencil']['h'], positive=True)
    conf['stencil']['richardson'] = bool(conf['stencil']['richardson'])

    output = conf['output']
    if not isinstance(output['directory'], str) or not isinstance(output['json'], str):
        raise ConfigError('output.directory and output.json must be strings')
    output['csv'] = bool(output['csv'])

    return RunConfig(**conf)


def dump_conf(conf):
    """The YAML text of a validated configuration; load_conf + validate_conf of it gives back conf."""
    return yaml.dump(conf.to_dict(), default_flow_style=False, allow_unicode=True, sort_keys=True)


def read_run_config(path):
    """load_conf followed by validate_conf."""
    return validate_conf(load_conf(path))
