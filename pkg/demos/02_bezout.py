"""
Solving a Bezout equation with two dbar corrections
===================================================

For f1 = (z + w)/2 and f2 = 1 + zw/2 we build analytic h1, h2 with
f1 h1 + f2 h2 = 1.  The solver first smooths, then removes the
non-analytic part in z, then in w.
"""

import time

from beurling import Series2D, Weight, bezout_solve, delta_pair, multiply, weighted_norm
from beurling.corona import mid_stage_error

w = Weight(0.5, 0.5)
f1 = Series2D({(1, 0): 0.5, (0, 1): 0.5})
f2 = Series2D({(0, 0): 1, (1, 1): 0.5})

# joint lower bound of |f1|^2 + |f2|^2 over the closed bidisc
delta = delta_pair(f1, f2)
print("delta =", delta)

t0 = time.perf_counter()
sol, inter = bezout_solve(f1, f2, delta, w)
print(f"solved in {time.perf_counter() - t0:.1f} s on angular grid {inter.summary['grid']['angular_n']}")

# the intermediate pair g1, g2 solves the equation pointwise before projection
print("mid-stage error:", mid_stage_error(f1, f2, inter))

res = weighted_norm(multiply(f1, sol.h1) + multiply(f2, sol.h2) - 1.0, w)
print("residual:", res)
print("anti-analytic leak:", sol.anti_analytic_leak)
print("||h1||, ||h2||:", weighted_norm(sol.h1, w), weighted_norm(sol.h2, w))

# certificate, stated for the pair after scaling to unit norm
c = sol.certificate
print(f"bound exponent {c.exponent:g}, measured {c.measured_norm:.4g} at delta {c.delta:.4g}")

# the leading coefficients of h1
for n in range(3):
    print(" ", [f"{sol.h1[(n, m)].real:+.4f}" for m in range(3)])
