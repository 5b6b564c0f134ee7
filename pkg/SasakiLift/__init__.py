"""
SasakiLift
====================================
Shearfree quasi-Einstein Lorentzian lifts of Sasakian CR manifolds given by a potential F,
with the solvers for the conformal factor and a finite-difference curvature verifier.
"""
__version__ = '0.1.0'
