"""
parser.py
====================================
Parser for the infix expressions that define potentials, harmonic functions, gauge functions and explicit p.
Uses top-down operator precedence (Pratt) parsing into an immutable AST, which can be evaluated on floats,
on Jet2 (fields in x, y) or on Jet1 (fields in y).

Grammar (EBNF):

    expression := term { ('+' | '-') term }
    term       := unary { ('*' | '/') unary }
    unary      := '-' unary | '+' unary | power
    power      := atom [ '^' unary ]                  (right associative)
    atom       := number | 'x' | 'y' | 'pi' | function '(' expression ')' | '(' expression ')'
    function   := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
    number     := digits [ '.' digits ] [ ('e' | 'E') [ '+' | '-' ] digits ]

'**' is accepted as a synonym of '^'.
"""
import math
import re
from dataclasses import dataclass
import numpy as np
from SasakiLift.errors import ExpressionError, SingularPointError
from SasakiLift.jets.jet import Jet1, Jet2, _TaylorJet, ORDER

FUNCTIONS = ('sin', 'cos', 'exp', 'log', 'sqrt')
VARIABLES = ('x', 'y')
CONSTANTS = {'pi': math.pi}

_TOKEN_PATTERN = re.compile(
    r'\s*(?:(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)'
    r'|(?P<name>[A-Za-z_][A-Za-z_0-9]*)'
    r'|(?P<op>\*\*|[-+*/^()]))'
)


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: object
    right: object


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def tokenize(text):
    """Splits text into tokens; raises ExpressionError at the first character that starts no token."""
    tokens = []
    position = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN_PATTERN.match(text, position)
        if match is None or match.end() == position:
            position = len(text) - len(text[position:].lstrip())
            raise ExpressionError(f'unexpected character {text[position]!r}', position)
        kind = match.lastgroup
        start = match.start(kind)
        token_text = match.group(kind)
        if kind == 'op' and token_text == '**':
            token_text = '^'
        tokens.append(_Token(kind, token_text, start))
        position = match.end()
    tokens.append(_Token('end', '', len(text)))
    return tokens


class _Parser:
    # binding powers
    _INFIX = {'+': 10, '-': 10, '*': 20, '/': 20, '^': 40}
    _PREFIX = 30

    def __init__(self, text):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def token(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.token
        self.index += 1
        return token

    def expect(self, text):
        if self.token.text != text:
            found = self.token.text or 'end of input'
            raise ExpressionError(f'expected {text!r} but found {found!r}', self.token.position)
        return self.advance()

    def parse(self):
        node = self.expression(0)
        if self.token.kind != 'end':
            raise ExpressionError(f'unexpected token {self.token.text!r}', self.token.position)
        return node

    def expression(self, rbp):
        left = self.nud(self.advance())
        while self.token.kind == 'op' and self._INFIX.get(self.token.text, 0) > rbp:
            op = self.advance().text
            if op == '^':
                # right associative, and the exponent may carry a sign: 2^-x
                right = self.expression(self._INFIX[op] - 1) if self.token.text != '-' else self.nud(self.advance())
            else:
                right = self.expression(self._INFIX[op])
            left = Binary(op, left, right)
        return left

    def nud(self, token):
        if token.kind == 'number':
            return Constant(float(token.text))
        if token.kind == 'name':
            if token.text in VARIABLES:
                return Variable(token.text)
            if token.text in CONSTANTS:
                return Constant(CONSTANTS[token.text])
            if token.text in FUNCTIONS:
                self.expect('(')
                argument = self.expression(0)
                self.expect(')')
                return Unary(token.text, argument)
            raise ExpressionError(f'unknown identifier {token.text!r}', token.position)
        if token.text == '(':
            node = self.expression(0)
            self.expect(')')
            return node
        if token.text == '-':
            return Unary('neg', self.expression(self._PREFIX))
        if token.text == '+':
            return self.expression(self._PREFIX)
        if token.kind == 'end':
            raise ExpressionError('unexpected end of input', token.position)
        raise ExpressionError(f'unexpected token {token.text!r}', token.position)


def _apply_function(name, value):
    if isinstance(value, _TaylorJet):
        return getattr(value, name)()
    if name in ('log', 'sqrt'):
        if np.iscomplexobj(value) and abs(np.imag(value)) > 0:
            return getattr(np, name)(value)
        if np.real(value) <= 0 and not (name == 'sqrt' and np.real(value) == 0):
            raise SingularPointError(f'{name} of non-positive value {value}')
    return getattr(np, name)(value)


def _power(base, exponent):
    if isinstance(exponent, _TaylorJet):
        return base ** exponent if isinstance(base, _TaylorJet) else (exponent * math.log(base)).exp()
    if isinstance(base, _TaylorJet):
        return base ** exponent
    if float(exponent) != int(exponent) and np.real(base) <= 0 and not np.iscomplexobj(base):
        if base == 0 and exponent > 0:
            return 0.0
        raise SingularPointError(f'non-integer power {exponent} of non-positive value {base}')
    return base ** exponent


def _evaluate(node, env):
    if isinstance(node, Constant):
        return node.value
    if isinstance(node, Variable):
        if node.name not in env:
            raise ExpressionError(f'variable {node.name!r} is not available in this context')
        return env[node.name]
    if isinstance(node, Unary):
        operand = _evaluate(node.operand, env)
        if node.op == 'neg':
            return -operand
        return _apply_function(node.op, operand)
    left = _evaluate(node.left, env)
    right = _evaluate(node.right, env)
    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if node.op == '/':
        if not isinstance(right, _TaylorJet) and right == 0:
            raise SingularPointError('division by zero')
        return left / right
    return _power(left, right)


def _variables(node):
    if isinstance(node, Variable):
        return {node.name}
    if isinstance(node, Unary):
        return _variables(node.operand)
    if isinstance(node, Binary):
        return _variables(node.left) | _variables(node.right)
    return set()


class ExpressionAst:
    """
    A parsed expression. Immutable; evaluation is pure.

    Parameters
    ----------
    text : str
        the source text
    root : Constant, Variable, Unary or Binary
        the root node of the tree
    """

    def __init__(self, text, root):
        self.text = text
        self.root = root
        self.variables = frozenset(_variables(root))

    def evaluate(self, **env):
        """Evaluates with the variables bound to floats, complex numbers, or jets."""
        return _evaluate(self.root, env)

    def __call__(self, x, y):
        return self.evaluate(x=x, y=y)

    def jet2(self, x0, y0):
        """The Jet2 (order ORDER) of the expression at (x0, y0)."""
        base = (x0, y0)
        env = {'x': Jet2.variable('x', base), 'y': Jet2.variable('y', base)}
        result = self.evaluate(**env)
        if not isinstance(result, Jet2):
            result = Jet2.constant(result, base)
        return result

    def jet1(self, y0, order=ORDER, x0=None):
        """The Jet1 of an expression in y at y0; an x occurring in the expression is frozen at x0."""
        env = {'y': Jet1.variable(y0, order)}
        if x0 is not None:
            env['x'] = x0
        result = self.evaluate(**env)
        if not isinstance(result, Jet1):
            result = Jet1.constant(result, y0, order)
        return result

    def __repr__(self):
        return f'ExpressionAst({self.text!r})'

    def __eq__(self, other):
        return isinstance(other, ExpressionAst) and self.root == other.root

    def __hash__(self):
        return hash(self.root)


def parse_expression(text):
    """
    Parses an infix expression over x and y.

    Parameters
    ----------
    text : str
        e.g. 'log(1 + x^2 + y^2)'

    Returns
    -------
    ast : ExpressionAst
        the parsed expression

    Raises
    ------
    ExpressionError
        on a syntax error (with the character position) or an unknown identifier
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError('empty expression', 0)
    return ExpressionAst(text, _Parser(text).parse())
