"""
Numerical diagnostics for ideals of the analytic algebras.

* outer functions from boundary log-modulus, and radial profiles
  (1 - r) log|f(r, w)| that separate outer from inner-type behaviour;
* the growth bound 1/|f(z, w)| <= exp(M / (1 - |z|)) for functions that do
  not vanish on D x closed(D);
* the function u(z, w) = (1-z)(1-w) / (sqrt(1-z) + sqrt(1-w))^2, its image,
  its comparability with min(|1-z|, |1-w|) and the coefficients of u^2;
* the weighted area integral of the mixed fourth derivative that certifies
  membership in A+_{alpha,beta};
* delta(lambda) = inf |lambda - v| + |f| over the bidisc.

Square roots are principal throughout, so Re sqrt(1 - z) >= 0 on the closed
disc and every algebraic identity below is evaluated on one branch.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, PreconditionError
from .series import Series1D, Series2D, Weight, evaluate, partial_derivative, weighted_norm

UNIFORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# Outer functions


def exp_series(h, degree: int) -> np.ndarray:
    """Taylor coefficients of exp(H) up to ``degree`` from those of H.

    Uses n F_n = sum_{k=1}^n k H_k F_{n-k}.
    """
    h = np.zeros(degree + 1, dtype=complex) if h is None else np.asarray(h, dtype=complex)
    hh = np.zeros(degree + 1, dtype=complex)
    hh[: min(h.size, degree + 1)] = h[: degree + 1]
    out = np.zeros(degree + 1, dtype=complex)
    out[0] = np.exp(hh[0])
    k = np.arange(degree + 1)
    kh = k * hh
    for n in range(1, degree + 1):
        out[n] = np.dot(kh[1 : n + 1], out[n - 1 :: -1][:n]) / n
    return out


def _uniform_angles(angles):
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    if n < 2:
        raise ValueError("need at least two samples")
    step = 2 * np.pi / n
    expected = angles[0] + step * np.arange(n)
    if np.max(np.abs(angles - expected)) > UNIFORM_TOL * max(1.0, abs(angles[0])):
        raise ValueError("angles must form a uniform grid of the circle in increasing order")
    return angles[0]


def herglotz_coefficients(angles, log_modulus) -> np.ndarray:
    """Taylor coefficients of H = c_0 + 2 sum_{k >= 1} c_k z^k, Re H = log_modulus on the circle."""
    theta0 = _uniform_angles(angles)
    vals = np.asarray(log_modulus, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("log-modulus samples must be finite")
    n = vals.size
    c = np.fft.fft(vals) / n
    k = np.arange(n // 2)
    c = c[: n // 2] * np.exp(-1j * k * theta0)
    h = 2 * c
    h[0] = c[0].real
    return h


def outer_from_modulus(samples, degree: int) -> Series1D:
    """Outer function with boundary modulus exp(log_modulus), truncated at ``degree``.

    ``samples`` is a sequence of (angle, log_modulus) pairs on a uniform grid,
    or a pair of arrays.  The value at 0 is real and positive.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2 and arr.shape[0] != 2:
        angles, logm = arr[:, 0], arr[:, 1]
    elif arr.ndim == 2 and arr.shape[0] == 2:
        angles, logm = arr[0], arr[1]
    else:
        raise ValueError("samples must be (angle, log_modulus) pairs")
    h = herglotz_coefficients(angles, logm)
    return Series1D.from_dense(exp_series(h, degree), 0)


@dataclass
class OuterProfile:
    w_point: complex
    radii: list
    values: list
    extrapolated_limit: float

    def to_csv(self) -> str:
        return outer_profile_csv(self)


def default_profile_radii(levels: int = 12):
    return [1.0 - 2.0 ** (-k) for k in range(1, levels + 1)]


def extrapolate_to_boundary(radii, values) -> float:
    """Value at r = 1 of the quadratic in h = 1 - r through the last three points.

    With h halving this is two steps of Richardson extrapolation.
    """
    h = 1.0 - np.asarray(radii[-3:], dtype=float)
    v = np.asarray(values[-3:], dtype=float)
    if h.size < 3:
        return float(v[-1])
    # Lagrange basis at 0
    l0 = h[1] * h[2] / ((h[0] - h[1]) * (h[0] - h[2]))
    l1 = h[0] * h[2] / ((h[1] - h[0]) * (h[1] - h[2]))
    l2 = h[0] * h[1] / ((h[2] - h[0]) * (h[2] - h[1]))
    return float(l0 * v[0] + l1 * v[1] + l2 * v[2])


def outer_profile(f: Series2D, w_point: complex, radii=None) -> OuterProfile:
    """(1 - r) log|f(r, w_point)| along ``radii`` with an extrapolated limit."""
    if abs(w_point) > 1 + 1e-15:
        raise ValueError("w_point must lie in the closed disc")
    if not f.analytic:
        raise ValueError("outer_profile needs an analytic series")
    radii = default_profile_radii() if radii is None else [float(r) for r in radii]
    r = np.asarray(radii)
    if np.any(r <= 0) or np.any(r >= 1) or np.any(np.diff(r) <= 0):
        raise ValueError("radii must increase strictly inside (0, 1)")
    vals = np.abs(evaluate(f, r, complex(w_point)))
    zero = np.nonzero(vals == 0)[0]
    if zero.size:
        raise PreconditionError(f"f(r, w) vanishes at r = {r[zero[0]]!r}")
    prof = ((1 - r) * np.log(vals)).tolist()
    return OuterProfile(complex(w_point), radii, prof, extrapolate_to_boundary(radii, prof))


# ---------------------------------------------------------------------------
# Growth bound


def _disc_points(radii, angular_n):
    ang = np.exp(2j * np.pi * np.arange(angular_n) / angular_n)
    return (np.asarray(radii, dtype=float)[:, None] * ang[None, :]).reshape(-1)


def min_modulus_bound(f: Series2D, grid_n: int = 64, sup_tol: float = 1e-12) -> float:
    """M = 2 max_w log(1 / |f(0, w)|) over a grid of the closed w-disc.

    Requires sup |f| <= 1 on the torus grid (the caller normalises) and f(0, w)
    bounded away from 0.
    """
    if grid_n < 4:
        raise ValueError("grid_n must be at least 4")
    ang = np.exp(2j * np.pi * np.arange(grid_n) / grid_n)
    sup = float(np.max(np.abs(evaluate(f, ang[:, None], ang[None, :]))))
    if sup > 1 + sup_tol:
        raise PreconditionError(f"sup |f| on the torus grid is {sup:.6g} > 1; normalise first")
    w = _disc_points([0.0, 0.5, 0.9, 0.99, 1.0], grid_n)
    m0 = np.abs(evaluate(f, 0.0, w))
    low = float(m0.min())
    if low < 1e-12:
        raise PreconditionError(f"f(0, w) nearly vanishes (min {low:.3g}); M is unbounded")
    return 2.0 * float(np.max(-np.log(m0)))


@dataclass
class GrowthCheck:
    M: float
    points: int
    violations: int
    worst_margin: float


def growth_check(f: Series2D, M: float, radii=(0.5, 0.9, 0.99), grid_n: int = 64) -> GrowthCheck:
    """Count samples with log(1/|f(z, w)|) > M / (1 - |z|).

    z runs over ``radii`` x grid_n angles, w over the same radii and the unit
    circle.  ``worst_margin`` is the largest log(1/|f|) - M/(1-|z|).
    """
    r = np.asarray(radii, dtype=float)
    if np.any(r >= 1) or np.any(r < 0):
        raise ValueError("z radii must lie in [0, 1)")
    z = _disc_points(r, grid_n)
    w = _disc_points(sorted(set(r.tolist()) | {1.0}), grid_n)
    vals = np.abs(evaluate(f, z[:, None], w[None, :]))
    with np.errstate(divide="ignore"):
        lhs = -np.log(vals)
    rhs = M / (1 - np.abs(z))[:, None]
    margin = lhs - rhs
    return GrowthCheck(float(M), int(margin.size), int(np.count_nonzero(margin > 0)),
                       float(np.max(margin)))


def growth_surrogate(f: Series2D, shells=(0.9, 0.99, 0.999), grid_n: int = 64):
    """sup over |z| = |w| = s of min(|1-z|, |1-w|) |log|f(z, w)|| for each shell s.

    A finite-data stand-in for the o(1 / min(|1-z|, |1-w|)) growth
    hypothesis; reported, never asserted.
    """
    out = []
    ang = np.exp(2j * np.pi * np.arange(grid_n) / grid_n)
    for s in shells:
        z = s * ang
        vals = np.abs(evaluate(f, z[:, None], z[None, :]))
        with np.errstate(divide="ignore"):
            lg = np.abs(np.log(vals))
        d = np.minimum(np.abs(1 - z)[:, None], np.abs(1 - z)[None, :])
        out.append((float(s), float(np.max(d * lg))))
    return out


# ---------------------------------------------------------------------------
# The function u


def u_eval(z, w):
    """u(z, w) = (1-z)(1-w) / (sqrt(1-z) + sqrt(1-w))^2, principal roots.

    Vectorised.  The removable point z = w = 1 evaluates to 0.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    s, t = np.sqrt(1 - z), np.sqrt(1 - w)
    den = (s + t) ** 2
    num = (s * s) * (t * t)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den == 0, 0, num / np.where(den == 0, 1, den))
    return out[()]


def u_squared(z, w):
    return u_eval(z, w) ** 2


def u_squared_d4(z, w):
    """d^4 (u^2) / dz^2 dw^2 = -15 s t (3 s^2 - 8 s t + 3 t^2) / (4 (s + t)^8), s = sqrt(1-z), t = sqrt(1-w)."""
    s = np.sqrt(1 - np.asarray(z, dtype=complex))
    t = np.sqrt(1 - np.asarray(w, dtype=complex))
    return (-15 * s * t * (3 * s * s - 8 * s * t + 3 * t * t) / (4 * (s + t) ** 8))[()]


@dataclass(frozen=True)
class DiscGrid:
    """Tensor grid (radii x angular_n angles) in each of the two variables."""

    radii: tuple = (0.0, 0.5, 0.9, 0.99, 1.0)
    angular_n: int = 128

    def points(self):
        return _disc_points(self.radii, self.angular_n)

    def pairs(self, exclude_corner=True):
        """Flattened (z, w) arrays over the tensor grid, (1, 1) removed."""
        p = self.points()
        z = np.repeat(p, p.size)
        w = np.tile(p, p.size)
        if exclude_corner:
            keep = ~((np.abs(z - 1) < 1e-15) & (np.abs(w - 1) < 1e-15))
            z, w = z[keep], w[keep]
        return z, w


COMPARABILITY_LOW = 0.25 * math.cos(math.pi / 4) ** 2 * 0.99


def u_comparability(grid: DiscGrid = DiscGrid(), check: bool = True):
    """min and max of |u(z, w)| / min(|1-z|, |1-w|) over the grid.

    Points with z = 1 or w = 1 (where both sides vanish) are skipped.
    With ``check`` the bounds c_low >= cos^2(pi/4)/4 * 0.99 and c_high <= 1
    are asserted.
    """
    z, w = grid.pairs()
    d = np.minimum(np.abs(1 - z), np.abs(1 - w))
    keep = d > 0
    ratio = np.abs(u_eval(z[keep], w[keep])) / d[keep]
    lo, hi = float(ratio.min()), float(ratio.max())
    if check and not (lo >= COMPARABILITY_LOW and hi <= 1 + 1e-12):
        raise AssertionError(f"comparability bounds violated: c_low={lo}, c_high={hi}")
    return lo, hi


def comparability_table(grid: DiscGrid = DiscGrid()):
    """Rows (r_z, r_w, min ratio, max ratio) per pair of radii."""
    ang = np.exp(2j * np.pi * np.arange(grid.angular_n) / grid.angular_n)
    rows = []
    for rz in grid.radii:
        for rw in grid.radii:
            z = (rz * ang)[:, None]
            w = (rw * ang)[None, :]
            d = np.minimum(np.abs(1 - z), np.abs(1 - w))
            keep = d > 0
            ratio = (np.abs(u_eval(z, w)) / np.where(keep, d, 1))[keep]
            rows.append((float(rz), float(rw), float(ratio.min()), float(ratio.max())))
    return rows


def u_image_margin(grid: DiscGrid = DiscGrid()) -> float:
    """min of Re(1/u) over the grid, skipping the zeros of u."""
    z, w = grid.pairs()
    u = u_eval(z, w)
    u = u[u != 0]
    return float(np.min((1 / u).real))


def u_image_check(grid: DiscGrid = DiscGrid(radii=(0.5, 0.9, 0.99), angular_n=128)) -> bool:
    """True when Re(u / |u|^2) >= 1/2 - 1e-12 at every grid point, i.e. |1 - u| <= 1."""
    return u_image_margin(grid) >= 0.5 - 1e-12


def u_squared_series(N: int, inner_radius: float | None = None, oversample: int = 4,
                     rtol: float = 1e-6) -> Series2D:
    """Taylor coefficients of u^2 of degree <= N in each variable.

    u^2 is sampled on the torus of radius R (default 1 - 4/N) in each
    variable with ``oversample * N`` points per axis, transformed, and the
    coefficients are divided by R^(n+m).  A second pass at radius
    (1 + R) / 2 - 0.5 / N must agree to ``rtol`` relative to the largest
    coefficient, otherwise ConvergenceError.
    """
    if N < 2 or N & (N - 1):
        raise ValueError("N must be a power of two >= 2")
    if oversample < 2:
        raise ValueError("oversample must be at least 2")
    R = 1 - 4.0 / N if inner_radius is None else float(inner_radius)
    if not 0 < R < 1:
        raise ValueError("inner_radius must lie in (0, 1)")
    c1 = _u2_coefficients(N, R, oversample)
    R2 = 1 - 0.5 * (1 - R)
    c2 = _u2_coefficients(N, R2, oversample)
    err = float(np.max(np.abs(c1 - c2)))
    scale = float(np.max(np.abs(c1)))
    if err > rtol * scale:
        raise ConvergenceError(f"radii {R} and {R2} disagree by {err:.3g} (relative {err / scale:.3g})",
                               partial=Series2D.from_dense(c1, 0, 0, analytic=True))
    return Series2D.from_dense(c1, 0, 0, analytic=True)


def _u2_coefficients(N, R, oversample):
    M = oversample * N
    pts = R * np.exp(2j * np.pi * np.arange(M) / M)
    vals = u_squared(pts[:, None], pts[None, :])
    coef = np.fft.fft2(vals)[: N + 1, : N + 1] / (M * M)
    k = np.arange(N + 1)
    return coef / (R ** k[:, None] * R ** k[None, :])


def v_power_identity(N: int = 1, grid_n: int = 64, radius: float = 0.9) -> float:
    """max |v^(2N) g - (1-z)^(4N+1) (1-w)^(4N+1)| on a torus of the given radius.

    v = u^2 and g = (1-z)(1-w)(sqrt(1-z) + sqrt(1-w))^(8N), both sides built
    from the same principal roots.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    pts = radius * np.exp(2j * np.pi * np.arange(grid_n) / grid_n)
    z, w = pts[:, None], pts[None, :]
    v = u_squared(z, w)
    s, t = np.sqrt(1 - z), np.sqrt(1 - w)
    g = (1 - z) * (1 - w) * (s + t) ** (8 * N)
    lhs = v ** (2 * N) * g
    rhs = (1 - z) ** (4 * N + 1) * (1 - w) ** (4 * N + 1)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# Membership integral


@dataclass
class MembershipResult:
    value: float
    refined_value: float
    relative_change: float
    converged: bool
    levels: tuple = field(default=())

    @property
    def verdict(self):
        return "finite, refinement-stable" if self.converged else "integral likely infinite"


def _disc_rule(radial_nodes, angular_nodes, power):
    """Nodes and weights for \\int_D g(z) (1 - |z|)^power dA(z).

    r = 1 - t^2 with Gauss-Legendre in t, and theta = pi s^3 with
    Gauss-Legendre in s so that nodes cluster at z = 1.
    """
    t, wt = np.polynomial.legendre.leggauss(radial_nodes)
    t, wt = 0.5 * (t + 1), 0.5 * wt
    r = 1 - t * t
    # dr = 2 t dt, (1 - r)^power = t^(2 power), dA = r dr dtheta
    wr = wt * 2 * t * t ** (2 * power) * r
    s, ws = np.polynomial.legendre.leggauss(angular_nodes)
    theta = np.pi * s**3
    wth = ws * 3 * np.pi * s * s
    z = (r[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    w = (wr[:, None] * wth[None, :]).reshape(-1)
    return z, w


def _d4_callable(f):
    if isinstance(f, Series2D):
        d4 = partial_derivative(f, 2, 2)
        return lambda z, w: evaluate(d4, z, w)
    return f


def _weighted_integral(d4, p, q, radial_nodes, angular_nodes, block=1 << 20):
    z, wz = _disc_rule(radial_nodes, angular_nodes, p)
    w, ww = _disc_rule(radial_nodes, angular_nodes, q)
    rows = max(1, block // w.size)
    total = 0.0
    for i in range(0, z.size, rows):
        vals = np.abs(np.asarray(d4(z[i : i + rows, None], w[None, :]))) ** 2
        total += float(wz[i : i + rows] @ (vals @ ww))
    return total


def membership_integral(f, weight: Weight, eps: float, radial_nodes: int = 32,
                        angular_nodes: int = 64, rtol: float = 1e-2) -> MembershipResult:
    """\\int_{D^2} |d^4 f / dz^2 dw^2|^2 (1-|z|)^(2(1-alpha)-eps) (1-|w|)^(2(1-beta)-eps) dA dA.

    ``f`` is a Series2D or a vectorised callable returning the mixed fourth
    derivative.  The integral is computed at two levels (node counts n and
    2n); ``converged`` records whether they agree to ``rtol``.
    """
    emax = 2 * min(1 - weight.alpha, 1 - weight.beta)
    if not 0 < eps < emax:
        raise ValueError(f"eps must lie in (0, {emax:g}), got {eps}")
    p = 2 * (1 - weight.alpha) - eps
    q = 2 * (1 - weight.beta) - eps
    d4 = _d4_callable(f)
    lo = _weighted_integral(d4, p, q, radial_nodes, angular_nodes)
    hi = _weighted_integral(d4, p, q, 2 * radial_nodes, 2 * angular_nodes)
    change = abs(hi - lo) / max(abs(hi), np.finfo(float).tiny)
    converged = bool(np.isfinite(hi)) and (hi == lo or change <= rtol)
    return MembershipResult(lo, hi, 0.0 if hi == lo else change, converged,
                            ((radial_nodes, angular_nodes), (2 * radial_nodes, 2 * angular_nodes)))


def membership_closed_form_monomial(weight: Weight, eps: float) -> float:
    """The integral for f = z^2 w^2, whose fourth derivative is 4."""
    p = 2 * (1 - weight.alpha) - eps
    q = 2 * (1 - weight.beta) - eps
    return 16 * (2 * np.pi) ** 2 / ((p + 1) * (p + 2) * (q + 1) * (q + 2))


# ---------------------------------------------------------------------------
# delta(lambda)


@dataclass
class DeltaLambda:
    lam: complex
    delta: float
    outside_min: float
    lower_bound_ok: bool
    argmin: tuple


def _as_callable(g):
    if isinstance(g, Series2D):
        return lambda z, w: evaluate(g, z, w)
    if callable(g):
        return g
    c = complex(g)
    return lambda z, w: np.full(np.broadcast(z, w).shape, c)


def delta_lambda(f, v, lam: complex, grid: DiscGrid = DiscGrid(), refine: bool = True) -> DeltaLambda:
    """inf |lambda - v| + |f| over the bidisc, sampled on ``grid``.

    f and v are Series2D, callables or constants.  ``outside_min`` is the
    sampled minimum over points with |v - lambda| > |lambda|/2, which must be
    at least |lambda|/2.
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    fc, vc = _as_callable(f), _as_callable(v)
    p = grid.points()
    z, w = p[:, None], p[None, :]
    dv = np.abs(lam - vc(z, w))
    vals = dv + np.abs(fc(z, w))
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    best = float(vals[i, j])
    arg = (complex(p[i]), complex(p[j]))
    outside = dv > abs(lam) / 2
    outside_min = float(vals[outside].min()) if np.any(outside) else math.inf
    if refine:
        def obj(x):
            zz = x[0] * np.exp(1j * x[1])
            ww = x[2] * np.exp(1j * x[3])
            return float(abs(lam - vc(zz, ww)) + abs(fc(zz, ww)))

        x0 = [abs(arg[0]), np.angle(arg[0]), abs(arg[1]), np.angle(arg[1])]
        res = optimize.minimize(obj, x0, method="L-BFGS-B",
                                bounds=[(0, 1), (None, None), (0, 1), (None, None)])
        if res.fun < best:
            best = float(res.fun)
            arg = (complex(res.x[0] * np.exp(1j * res.x[1])), complex(res.x[2] * np.exp(1j * res.x[3])))
    return DeltaLambda(lam, best, outside_min, bool(outside_min >= abs(lam) / 2), arg)


# ---------------------------------------------------------------------------
# CSV output


def _csv(header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, complex):
        return repr(x.real) if x.imag == 0 else f"{x.real!r}{x.imag:+.17g}j"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def outer_profile_csv(profile: OuterProfile) -> str:
    return _csv(["r", "value"], zip(profile.radii, profile.values))


def delta_lambda_csv(results) -> str:
    return _csv(["lambda", "delta", "lower_bound_ok"],
                [(r.lam, r.delta, r.lower_bound_ok) for r in results])


def comparability_csv(rows) -> str:
    return _csv(["r_z", "r_w", "min_ratio", "max_ratio"], rows)


def normalise_sup(f: Series2D, weight: Weight | None = None) -> Series2D:
    """f divided by its l1 coefficient norm, an upper bound for sup |f| on the closed bidisc."""
    n = weighted_norm(f, weight or Weight(0.0, 0.0))
    if n == 0:
        raise PreconditionError("cannot normalise the zero series")
    return f / n
