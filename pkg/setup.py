from setuptools import setup, find_packages
import io
import os

NAME = 'SasakiLift'
DESCRIPTION = 'Shearfree quasi-Einstein Lorentzian lifts of Sasakian CR manifolds, with solvers and a curvature verifier.'
URL = ''
REQUIRES_PYTHON = '>=3.8.0'
VERSION = '0.1.0'

try:
    with io.open(os.path.join('.', 'README.md'), encoding='utf-8') as f:
        long_description = '\n' + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

setup(
    name=NAME,
    version=VERSION,
    description=DESCRIPTION,
    long_description=long_description,
    long_description_content_type='text/markdown',
    license="MIT",
    python_requires=REQUIRES_PYTHON,
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    install_requires=["scipy>=1.7.0", "numpy>=1.17.3", "pandas>=0.23.4", "pyyaml"],
    extras_require={'tests': ["pytest>=6.0", "hypothesis>=6.0"]},
    entry_points={'console_scripts': ['sasaki-lift=SasakiLift.cli:main']},
)
