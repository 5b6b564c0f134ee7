"""
potentials.py
====================================
Potentials F(x, y) of Sasakian CR manifolds embedded as v = F(z, zbar), and the catalog of potentials that
ship with the package. Every potential declares an admissible region; evaluation outside of it raises.
"""
from dataclasses import dataclass, field
from SasakiLift.errors import DomainError, ConfigError
from SasakiLift.expressions.parser import parse_expression

KINDS = ('flat', 'fubini_study', 'poincare', 'harmonic', 'tubular', 'frt', 'custom')


@dataclass(frozen=True)
class Domain:
    """
    Admissible region: the box x_range x y_range, optionally intersected with the open disc |z| < radius.
    """
    x_range: tuple = (-1.0, 1.0)
    y_range: tuple = (-1.0, 1.0)
    radius: float = None

    def contains(self, x, y):
        inside = self.x_range[0] <= x <= self.x_range[1] and self.y_range[0] <= y <= self.y_range[1]
        if self.radius is not None:
            inside = inside and x * x + y * y < self.radius ** 2
        return inside

    def check(self, x, y):
        if not self.contains(x, y):
            raise DomainError(f'point ({x}, {y}) lies outside the admissible region {self.describe()}')

    def describe(self):
        text = f'x in [{self.x_range[0]}, {self.x_range[1]}], y in [{self.y_range[0]}, {self.y_range[1]}]'
        if self.radius is not None:
            text += f', |z| < {self.radius}'
        return text

    def to_dict(self):
        result = {'x_range': list(self.x_range), 'y_range': list(self.y_range)}
        if self.radius is not None:
            result['radius'] = self.radius
        return result


@dataclass(frozen=True)
class Potential:
    """
    A potential F with its admissible region.

    Parameters
    ----------
    name : str
        catalog name or 'custom'
    kind : str
        one of KINDS
    expr : ExpressionAst
        F as an expression over x and y (tubular: over y only)
    domain : Domain
        admissible region
    tag : str
        which construction the potential exercises, embedded in reports
    description : str
        free text for the catalog listing
    default_p : str or None
        closed-form p used by the explicit_p lift mode
    """
    name: str
    kind: str
    expr: object
    domain: Domain = field(default_factory=Domain)
    tag: str = 'sasakian-structure'
    description: str = ''
    default_p: str = None

    @property
    def tubular(self):
        return self.kind == 'tubular'


def harmonic_potential_text(phi_re, phi_im):
    """F = z conj(phi(z)) + zbar phi(z) = 2 (x Re phi + y Im phi) for a holomorphic phi given by its parts."""
    return f'2*(x*({phi_re}) + y*({phi_im}))'


_CATALOG = {
    'flat': dict(
        kind='flat', text='x^2 + y^2', domain=Domain((-1.0, 1.0), (-1.0, 1.0)),
        tag='heisenberg-flat',
        description='F = |z|^2, Heisenberg sphere model, c = 0, R = 0'),
    'fubini_study': dict(
        kind='fubini_study', text='log(1 + x^2 + y^2)', domain=Domain((-1.0, 1.0), (-1.0, 1.0)),
        tag='kahler-einstein-lift',
        description='F = log(1 + |z|^2), Kahler-Einstein, constant q gives an Einstein lift'),
    'poincare': dict(
        kind='poincare', text='-log(1 - x^2 - y^2)', domain=Domain((-0.6, 0.6), (-0.6, 0.6), 1.0),
        tag='kahler-einstein-lift',
        description='F = -log(1 - |z|^2) on the unit disc, Kahler-Einstein with negative constant'),
    'harmonic': dict(
        kind='harmonic', text=harmonic_potential_text('x^2 - y^2', '2*x*y'), domain=Domain((0.5, 2.0), (-1.0, 1.0)),
        tag='ricci-flat-harmonic',
        description='F = z conj(phi) + zbar phi with phi(z) = z^2, harmonic F_zzbar, Ricci-flat lift with p = F_zzbar',
        default_p='4*x'),
    'tubular': dict(
        kind='tubular', text='exp(y)', domain=Domain((-1.0, 1.0), (-1.0, 1.0)),
        tag='quasi-einstein-tubular',
        description='F = F(y) (default exp(y)), lift equation reduces to an ODE, any cosmological constant'),
    'frt': dict(
        kind='frt', text='(16/35)*x^(7/2)', domain=Domain((0.5, 2.0), (-1.0, 1.0)),
        tag='fefferman-robinson-trautman',
        description=('Fefferman-Robinson-Trautman, the Lambda = 0 case of the general curvature relations: '
                     'F_zzbar = x^(3/2), p = F_zzbar^(2/3); p = x leaves the reduced equation residual 3/(64x)'),
        default_p='x'),
}


def catalog_names():
    return list(_CATALOG)


def make_potential(name, expression=None, domain=None, phi=None):
    """
    Builds a potential from the catalog, or a custom one.

    Parameters
    ----------
    name : str
        a catalog name, or 'custom'
    expression : str or None
        overrides the catalog expression (tubular: F(y); custom: F(x, y))
    domain : Domain or None
        overrides the catalog region
    phi : tuple of two str or None
        (Re phi, Im phi) for a harmonic potential with another holomorphic phi

    Returns
    -------
    potential : Potential
    """
    if name == 'custom':
        if expression is None:
            raise ConfigError('a custom potential needs an expression')
        return Potential('custom', 'custom', parse_expression(expression), domain or Domain(),
                         'sasakian-structure', f'custom F = {expression}')
    if name not in _CATALOG:
        raise ConfigError(f'unknown potential {name!r}; choose one of {KINDS}')

    entry = _CATALOG[name]
    text = entry['text']
    default_p = entry.get('default_p')
    if name == 'harmonic' and phi is not None:
        text = harmonic_potential_text(*phi)
        default_p = None
    elif expression is not None:
        text = expression
        default_p = None
    expr = parse_expression(text)
    if name == 'tubular' and 'x' in expr.variables:
        raise ConfigError(f'a tubular potential depends on y only, got {text!r}')
    return Potential(name, entry['kind'], expr, domain or entry['domain'], entry['tag'], entry['description'],
                     default_p)


def catalog():
    """All catalog potentials, in listing order."""
    return [make_potential(name) for name in _CATALOG]
