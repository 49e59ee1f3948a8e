"""Numerical laboratory for isothermal (gamma = 1) gas dynamics.

Subpackages cover the weak-entropy kernel family, the viscous regularized
solver with its a-priori bound checks, weak-form and entropy-inequality
verification, exact Riemann reference solutions, and desk-scale Young-measure
reduction experiments on the (W, Z) plane.
"""

__version__ = "0.1.0"
