"""Independent reference computations used by the tests.

Nothing here calls into the code paths it is used to check.
"""

import math

import numpy as np


def direct_norm(terms, alpha, beta):
    """Plain Python weighted l1 sum over a {(n, m): c} dict."""
    return sum(abs(c) * (1 + abs(n)) ** alpha * (1 + abs(m)) ** beta for (n, m), c in terms.items())


def naive_convolution(f_terms, g_terms):
    out = {}
    for (n1, m1), a in f_terms.items():
        for (n2, m2), b in g_terms.items():
            key = (n1 + n2, m1 + m2)
            out[key] = out.get(key, 0) + a * b
    return {k: v for k, v in out.items() if v != 0}


def geometric_inverse_2_minus_z_over_3(degree):
    """Coefficients of 3 / (2 - z) = 3 sum z^k / 2^(k+1)."""
    return np.array([3.0 / 2 ** (k + 1) for k in range(degree + 1)])


def neumann_direct_4_minus_z_minus_w(order):
    """6 / (4 - z - w) = 1.5 sum_k ((z + w) / 4)^k by repeated naive convolution."""
    base = {(1, 0): 0.25, (0, 1): 0.25}
    power = {(0, 0): 1.0}
    total = {}
    for _ in range(order + 1):
        for k, v in power.items():
            total[k] = total.get(k, 0) + 1.5 * v
        power = naive_convolution(power, base)
    return total


def cauchy_midpoint(a, z, n_rho=400, n_phi=400):
    """-(1/pi) int_D a(xi) / (xi - z) dA by the midpoint rule in polar coordinates about z.

    With xi = z + rho e^{i phi}, dA = rho drho dphi cancels the kernel, leaving
    -(1/pi) int_0^{2pi} e^{-i phi} int_0^{R(phi)} a(z + rho e^{i phi}) drho dphi,
    R(phi) the distance from z to the unit circle along e^{i phi}.
    """
    phi = (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
    e = np.exp(1j * phi)
    # |z + R e|^2 = 1  ->  R^2 + 2 R Re(conj(z) e) + |z|^2 - 1 = 0
    bcoef = (np.conj(z) * e).real
    R = -bcoef + np.sqrt(bcoef**2 + 1 - abs(z) ** 2)
    u = (np.arange(n_rho) + 0.5) / n_rho
    rho = R[:, None] * u[None, :]
    vals = a(z + rho * e[:, None])
    inner = vals.mean(axis=1) * R
    return -(1 / np.pi) * np.sum(np.conj(e) * inner) * (2 * np.pi / n_phi)


def torus_sup(values_fn, n=512):
    t = np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(np.abs(values_fn(t[:, None], t[None, :]))))


def u_closed_form_diagonal(z):
    return (1 - z) / 4


def membership_monomial_closed_form(alpha, beta, eps):
    p = 2 * (1 - alpha) - eps
    q = 2 * (1 - beta) - eps
    # int_D (1-|z|)^p dA = 2 pi / ((p + 1)(p + 2))
    return 16 * (2 * math.pi / ((p + 1) * (p + 2))) * (2 * math.pi / ((q + 1) * (q + 2)))


def mixed_fourth_derivative(g, z0, w0, radius=0.05, n=64):
    """d^4 g / dz^2 dw^2 at (z0, w0) from the (2, 2) Taylor coefficient on small circles."""
    t = np.exp(2j * np.pi * np.arange(n) / n)
    vals = g(z0 + radius * t[:, None], w0 + radius * t[None, :])
    coef = np.fft.fft2(vals) / (n * n)
    return 4 * coef[2, 2] / radius**4


def random_nonvanishing(rng, terms=6, degree=3):
    """c0 + p with |c0| > ||p||_1, scaled by its l1 norm so sup |f| <= 1 on the closed bidisc."""
    from beurling.series import Series2D

    idx = rng.integers(0, degree + 1, size=(terms, 2))
    coef = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    p = Series2D.from_arrays(idx, coef)
    p = p - p[(0, 0)]
    l1 = float(np.sum(np.abs(p.coefficients)))
    c0 = (l1 + rng.uniform(0.1, 1.0)) * np.exp(2j * np.pi * rng.uniform())
    f = p + c0
    return f / float(np.sum(np.abs(f.coefficients)))
