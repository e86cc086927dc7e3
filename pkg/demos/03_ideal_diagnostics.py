"""
Diagnostics around closed ideals
================================

Outer-function profiles, the growth bound for nonvanishing functions, the
auxiliary function u and the membership integral for u^2.
"""

import numpy as np

from beurling import Series2D, Weight, weighted_norm
from beurling.diagnostics import (
    growth_check,
    membership_integral,
    min_modulus_bound,
    outer_profile,
    u_comparability,
    u_eval,
    u_squared_d4,
    u_squared_series,
    v_power_identity,
)

w = Weight(0.5, 0.5)

# (1 - z)(1 - w)/4 is outer in z: (1-r) log|f(r, w)| tends to 0 at the boundary
f = Series2D({(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): 1}) / 4
prof = outer_profile(f, 0.5)
for r, v in list(zip(prof.radii, prof.values))[::3]:
    print(f"  r={r:.6f}  (1-r) log|f| = {v:+.3e}")
print("extrapolated limit:", prof.extrapolated_limit)

# growth bound 1/|f| <= exp(M/(1-|z|)) on a nonvanishing example
g = Series2D({(0, 0): 0.6, (1, 0): 0.3, (1, 1): -0.1})
M = min_modulus_bound(g)
chk = growth_check(g, M)
print(f"\nM = {M:.4f}, {chk.violations} violations over {chk.points} points")

# u(z, z) = (1 - z)/4 and u is comparable to |1-z| + |1-w|
z = 0.3 + 0.4j
print("\nu(z, z) =", u_eval(z, z), " (1-z)/4 =", (1 - z) / 4)
lo, hi = u_comparability()
print(f"comparability constants: {lo:.4f} .. {hi:.4f}")
print("v-power identity residual at N=1:", v_power_identity(1))

# partial weighted norms of u^2 increase, with increments halving
norms = [weighted_norm(u_squared_series(n), w) for n in (32, 64, 128, 256)]
print("\npartial norms of u^2:", np.round(norms, 6))
print("increments:", np.diff(norms))

res = membership_integral(u_squared_d4, w, 0.5, radial_nodes=16, angular_nodes=32)
print(f"membership integral: {res.value:.6g} -> {res.refined_value:.6g} ({res.verdict})")
