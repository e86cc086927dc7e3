"""
Certified inversion in a weighted algebra
=========================================

Invert a function that stays away from zero on the closed bidisc, check the
result against a geometric series, and watch the inverse norm grow as the
lower bound delta shrinks.
"""

import math

import numpy as np

from beurling import Series2D, Weight, invert, multiply, weighted_norm
from beurling.inversion import c1_exponent_2d, spectral_min

w = Weight(0.5, 0.5)

# (2 - z)/3 has modulus at least 1/3 on the closed disc
f = Series2D({(0, 0): 2 / 3, (1, 0): -1 / 3})
print("norm of f:", weighted_norm(f, w))
print("min |f| on the torus:", spectral_min(f, 256))

g, cert, trace = invert(f, 1 / 3, w)

# the exact inverse is (3/2) sum (z/2)^n
exact = np.array([1.5 * 0.5**n for n in range(20)])
got = np.array([g[(n, 0)] for n in range(20)])
print("max coefficient error:", np.max(np.abs(got - exact)))
print("residual ||f g - 1||:", weighted_norm(multiply(f, g) - 1.0, w))
print("Neumann terms used:", trace.terms_used, " rho =", trace.rho)

# a two-variable family whose torus minimum is exactly delta
print("\n delta   ||f^-1||   ||f^-1|| delta^%g" % c1_exponent_2d(w))
for delta in (0.5, 0.3, 0.2, 0.1):
    t = delta * (1 + math.sqrt(2)) / (1 - delta)
    f = Series2D({(0, 0): 1 + t, (1, 0): -0.5, (0, 1): -0.5}) / (1 + t + math.sqrt(2))
    g, cert, _ = invert(f, delta, w)
    print(f"{delta:6.2f} {cert.measured_norm:10.4f}   {cert.fitted_constant:.3e}")

# the last column shrinks: the exponent is an upper bound, and this family
# grows much more slowly than delta^-7
