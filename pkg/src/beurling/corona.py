"""
Constructive Bezout solutions f1 h1 + f2 h2 = 1 on the bidisc.

Starting from the smooth solution phi_i = conj(f_i) / F, F = |f1|^2 + |f2|^2,
two dbar corrections make it holomorphic, first in z and then in w:

    g1 = phi1 + f2 b,  g2 = phi2 - f1 b,   dbar_z b = phi1 dbar_z phi2 - phi2 dbar_z phi1
    h1 = g1 + f2 d,    h2 = g2 - f1 d,     dbar_w d = g1 dbar_w g2 - g2 dbar_w g1

b and d are Cauchy transforms in z and w.  For analytic f_i both right-hand
sides have closed forms

    a = conj(f1 f2_z - f2 f1_z) / F^2
    c = conj(f1 f2_w - f2 f1_w) / F^2 - dbar_w b,

and dbar_w b is itself the z-Cauchy transform of dbar_w a.  Only boundary
traces are needed at the end: h1, h2 are sampled on the torus and projected to
analytic coefficients by FFT.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import dbar
from .dbar import PolarGrid, PolarGridFunction
from .errors import ConvergenceError, PreconditionError, ToleranceError
from .inversion import ConstantPolicy, NormCertificate, c1_exponent_2d
from .series import Series2D, Weight, evaluate, multiply, partial_derivative, weighted_norm

log = logging.getLogger(__name__)

UNIVERSAL_FACTOR = 33.0
MAX_ANGULAR = 1024
DEFAULT_RADII = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0)
CHUNK = 1 << 21  # complex entries per streamed block


@dataclass(frozen=True)
class CoronaGrid:
    """Discretisation of the bidisc used by :func:`bezout_solve`."""

    radial_nodes: int = 32
    angular_n: int = 256
    w_radial_nodes: int | None = None
    w_angular_n: int | None = None

    @property
    def z_grid(self):
        return PolarGrid(self.radial_nodes, self.angular_n)

    @property
    def w_grid(self):
        return PolarGrid(self.w_radial_nodes or self.radial_nodes,
                         self.w_angular_n or self.angular_n)

    def doubled(self):
        return replace(self, angular_n=2 * self.angular_n,
                       w_angular_n=2 * (self.w_angular_n or self.angular_n))


@dataclass
class BezoutSolution:
    h1: Series2D
    h2: Series2D
    residual_norm: float
    anti_analytic_leak: float
    certificate: NormCertificate


@dataclass
class CoronaIntermediates:
    """Grid data of one run.

    F, phi1, phi2, a, b, g1, g2 live on polar-z x torus-w; c and d live on
    polar-w x torus-z (axes: w radius, w angle, z angle).  ``summary`` holds
    the scalar diagnostics.
    """

    F: PolarGridFunction
    phi1: PolarGridFunction
    phi2: PolarGridFunction
    a: PolarGridFunction
    b: PolarGridFunction
    c: PolarGridFunction | None
    d: PolarGridFunction | None
    g1: PolarGridFunction
    g2: PolarGridFunction
    summary: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Evaluation of polynomial data on tensor grids


class _Poly:
    """Dense coefficient table of an analytic polynomial for tensor evaluation."""

    def __init__(self, f: Series2D):
        self.c = f.dense_analytic() if len(f) else np.zeros((1, 1), dtype=complex)

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return self.on(_powers(z, self.c.shape[0]), _powers(w, self.c.shape[1]), z.shape + w.shape)

    def on(self, zpow, wpow, shape):
        """Evaluate from precomputed power tables (columns 0, 1, 2, ...)."""
        nz, nw = self.c.shape
        return (zpow[:, :nz] @ self.c @ wpow[:, :nw].T).reshape(shape)


def _powers(x, n):
    return np.asarray(x, dtype=complex).reshape(-1, 1) ** np.arange(n)


def _derivs(f: Series2D):
    return {
        "f": _Poly(f),
        "z": _Poly(partial_derivative(f, 1, 0)),
        "w": _Poly(partial_derivative(f, 0, 1)),
        "zw": _Poly(partial_derivative(f, 1, 1)),
    }


def _require_polynomial_pair(f1, f2):
    for f in (f1, f2):
        if not isinstance(f, Series2D):
            raise PreconditionError("inputs must be finitely supported Series2D")
        if not f.analytic:
            raise PreconditionError("inputs must have analytic support")


# ---------------------------------------------------------------------------
# Operations


def delta_pair(f1: Series2D, f2: Series2D, grid_n: int = 64, radii=DEFAULT_RADII,
               refine: bool = True) -> float:
    """min of (|f1|^2 + |f2|^2)^(1/2) over the closed bidisc.

    A grid_n x grid_n angular grid is tensored with ``radii`` in each
    variable; the best sample then seeds a bounded local minimisation.
    """
    _require_polynomial_pair(f1, f2)
    if grid_n < 4:
        raise ValueError("grid_n must be at least 4")
    p1, p2 = _Poly(f1), _Poly(f2)
    radii = np.asarray(radii, dtype=float)
    circle = np.exp(2j * np.pi * np.arange(grid_n) / grid_n)
    pts = (radii[:, None] * circle[None, :]).reshape(-1)
    F = np.abs(p1(pts, pts)) ** 2 + np.abs(p2(pts, pts)) ** 2
    i, j = np.unravel_index(np.argmin(F), F.shape)
    best = float(F[i, j])
    if refine:
        z0, w0 = pts[i], pts[j]

        def obj(x):
            z = x[0] * np.exp(1j * x[1])
            w = x[2] * np.exp(1j * x[3])
            return float(abs(evaluate(f1, z, w)) ** 2 + abs(evaluate(f2, z, w)) ** 2)

        x0 = [abs(z0), np.angle(z0), abs(w0), np.angle(w0)]
        bounds = [(0, 1), (None, None), (0, 1), (None, None)]
        res = optimize.minimize(obj, x0, method="L-BFGS-B", bounds=bounds,
                                options={"ftol": 1e-15, "gtol": 1e-12})
        best = min(best, float(res.fun))
    return math.sqrt(max(best, 0.0))


def c2_exponent(weight: Weight) -> float:
    """Total delta-power of C1(delta^2)^3: three copies of the inversion exponent at delta^2."""
    return 6.0 * c1_exponent_2d(weight)


def c2_certificate(delta: float, weight: Weight, measured_norm: float | None = None) -> NormCertificate:
    """Certificate for (||h1||^2 + ||h2||^2)^(1/2) <= 33 c^3 delta^-exponent.

    The universal factor 33 is recorded; the constant c of the inversion bound
    stays open, so ``fitted_constant`` is measured_norm * delta^exponent when a
    measured norm is supplied.
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    weight.require_positive()
    exponent = c2_exponent(weight)
    fitted = None if measured_norm is None else measured_norm * delta**exponent
    return NormCertificate(
        measured_norm=0.0 if measured_norm is None else float(measured_norm),
        delta=float(delta),
        exponent=exponent,
        constant_policy=ConstantPolicy(
            fitted_constant=fitted,
            reference="C2(delta) <= 33 * C1(delta^2)^3, C1(d) = c * d^-(3 + (1 + alpha + beta) / gamma)",
        ),
        universal_factor=UNIVERSAL_FACTOR,
    )


def _project(values, weight: Weight):
    """Analytic part of torus samples and the weighted mass of everything else."""
    nz, nw = values.shape
    coef = np.fft.fft2(values) / (nz * nw)
    n = np.fft.fftfreq(nz, 1.0 / nz).astype(int)
    m = np.fft.fftfreq(nw, 1.0 / nw).astype(int)
    # the Nyquist index counts as negative
    n[nz // 2] = -(nz // 2)
    m[nw // 2] = -(nw // 2)
    wgt = weight(n[:, None], m[None, :])
    neg = (n[:, None] < 0) | (m[None, :] < 0)
    leak = math.fsum((np.abs(coef[neg]) * wgt[neg]).tolist())
    keep = coef[: nz // 2, : nw // 2]
    return Series2D.from_dense(keep, 0, 0, analytic=True), leak


def _negative_z_mass(values, weight: Weight):
    nz, nw = values.shape
    coef = np.fft.fft2(values) / (nz * nw)
    n = np.fft.fftfreq(nz, 1.0 / nz).astype(int)
    m = np.fft.fftfreq(nw, 1.0 / nw).astype(int)
    wgt = weight(n[:, None], m[None, :])
    return math.fsum((np.abs(coef[n < 0]) * wgt[n < 0]).ravel().tolist())


def _stage_z(d1, d2, zg: PolarGrid, nw: int, delta: float, check_cols, keep: bool):
    """Stage Z streamed over blocks of torus-w columns (w is passive here).

    Returns the boundary trace of b on z-circle x w-torus, the largest
    polar-grid mid-stage error, the minimum of F, the dbar residual on the
    ``check_cols`` columns with max |a| there, and the full grid functions
    when ``keep`` is set (otherwise None).
    """
    nz = zg.angular_n
    zp = zg.points()
    wb = np.exp(2j * np.pi * np.arange(nw) / nw)
    roles = {"z": "polar", "w": "torus"}

    def gf(v):
        return PolarGridFunction(zg.radii, nz, v, zg.weights, roles)

    names = ("F", "phi1", "phi2", "a", "b", "g1", "g2")
    full = {k: np.empty((zg.radial_nodes, nz, nw), dtype=complex) for k in names} if keep else None
    bt = np.empty((nz, nw), dtype=complex)
    mid, fmin = 0.0, math.inf
    check_a, check_b = [], []
    block = max(1, min(nw, CHUNK // zp.size))
    for k0 in range(0, nw, block):
        sl = slice(k0, k0 + block)
        w = wb[sl]
        f1, f2 = d1["f"](zp, w), d2["f"](zp, w)
        F = np.abs(f1) ** 2 + np.abs(f2) ** 2
        fmin = min(fmin, float(F.min()))
        if fmin < delta**2 * (1 - 1e-12):
            raise PreconditionError(
                f"F = |f1|^2 + |f2|^2 drops to {fmin:.6g} < delta^2 = {delta**2:.6g} on the grid")
        P = f1 * d2["z"](zp, w) - f2 * d1["z"](zp, w)
        phi1, phi2 = np.conj(f1) / F, np.conj(f2) / F
        a = gf(np.conj(P) / F**2)
        b = dbar.cauchy_transform_z(a).values
        g1 = phi1 + f2 * b
        g2 = phi2 - f1 * b
        mid = max(mid, float(np.max(np.abs(f1 * g1 + f2 * g2 - 1))))
        bt[:, sl] = dbar.cauchy_boundary(a)
        local = [c - k0 for c in check_cols if k0 <= c < k0 + block]
        if local:
            check_a.append(a.values[:, :, local])
            check_b.append(b[:, :, local])
        if keep:
            for k, v in zip(names, (F, phi1, phi2, a.values, b, g1, g2)):
                full[k][:, :, sl] = v
    sub_a = gf(np.concatenate(check_a, axis=2))
    res_z = dbar.dbar_residual(gf(np.concatenate(check_b, axis=2)), sub_a)
    scale_z = 1.0 + float(np.max(np.abs(sub_a.values)))
    grids = {k: gf(v) for k, v in full.items()} if keep else None
    return bt, mid, fmin, res_z, scale_z, grids


def _dbar_w_a(d1, d2, z, w):
    """Closed form of dbar_w a on the tensor grid z x w.

    With P = f1 f2_z - f2 f1_z and a = conj(P) / F^2,
    dbar_w a = conj(P_w - 2 P conj(F_w) / F) / F^2 where conj(F_w) = dbar_w F conjugated.
    """
    deg = max(p.c.shape[0] for d in (d1, d2) for p in d.values())
    degw = max(p.c.shape[1] for d in (d1, d2) for p in d.values())
    zpow, wpow = _powers(z, deg), _powers(w, degw)
    shape = np.shape(z) + np.shape(w)

    def ev(d, key):
        return d[key].on(zpow, wpow, shape)

    f1, f2 = ev(d1, "f"), ev(d2, "f")
    f1z, f2z = ev(d1, "z"), ev(d2, "z")
    f1w, f2w = ev(d1, "w"), ev(d2, "w")
    inv = 1.0 / (f1.real**2 + f1.imag**2 + f2.real**2 + f2.imag**2)
    P = f1 * f2z
    P -= f2 * f1z
    out = f1w * f2z
    out += f1 * ev(d2, "zw")
    out -= f2w * f1z
    out -= f2 * ev(d1, "zw")
    Fw = np.conj(f1) * f1w
    Fw += np.conj(f2) * f2w
    Fw *= P
    Fw *= 2 * inv
    out -= Fw
    np.conjugate(out, out=out)
    out *= inv * inv
    return out


def _stage_w(d1, d2, zg: PolarGrid, wg: PolarGrid, delta: float):
    """c on polar-w x torus-z, streamed one w radius (and w-angle block) at a time."""
    nz, nw = zg.angular_n, wg.angular_n
    zp = zg.points()
    zb = np.exp(2j * np.pi * np.arange(nz) / nz)
    wang = np.exp(2j * np.pi * np.arange(nw) / nw)
    block = max(1, min(nw, CHUNK // zp.size))
    c = np.empty((wg.radial_nodes, nw, nz), dtype=complex)
    fmin = math.inf
    for j, s in enumerate(wg.radii):
        for k0 in range(0, nw, block):
            w = s * wang[k0:k0 + block]
            da = PolarGridFunction(zg.radii, nz, _dbar_w_a(d1, d2, zp, w), zg.weights,
                                   {"z": "polar", "w": "polar"})
            dwb = dbar.cauchy_boundary(da)  # (nz, block), z on the unit circle
            f1, f2 = d1["f"](zb, w), d2["f"](zb, w)
            F = np.abs(f1) ** 2 + np.abs(f2) ** 2
            fmin = min(fmin, float(F.min()))
            Q = f1 * d2["w"](zb, w) - f2 * d1["w"](zb, w)
            c[j, k0:k0 + block, :] = (np.conj(Q) / F**2 - dwb).T
    if fmin < delta**2 * (1 - 1e-12):
        raise PreconditionError(f"F drops to {fmin:.6g} < delta^2 on the stage-W grid")
    return PolarGridFunction(wg.radii, nw, c, wg.weights, {"w": "polar", "z": "torus"})


def _sample_rows(n, count):
    return np.unique(np.linspace(0, n - 1, min(n, count)).astype(int))


def _solve_once(f1, f2, delta, weight, grid: CoronaGrid, dbar_tol, keep_intermediates):
    zg, wg = grid.z_grid, grid.w_grid
    nz, nw = zg.angular_n, wg.angular_n
    d1, d2 = _derivs(f1), _derivs(f2)
    t0 = time.perf_counter()
    cols = _sample_rows(nw, 8)
    bt, mid, fmin, res_z, scale_z, grids = _stage_z(d1, d2, zg, nw, delta, cols, keep_intermediates)
    failures = []
    if res_z > dbar_tol * scale_z:
        failures.append(f"stage Z dbar residual {res_z:.3g} > {dbar_tol * scale_z:.3g}")

    # boundary trace on the torus, z angle x w angle
    zb = np.exp(2j * np.pi * np.arange(nz) / nz)
    wt = np.exp(2j * np.pi * np.arange(nw) / nw)
    f1t, f2t = d1["f"](zb, wt), d2["f"](zb, wt)
    Ft = np.abs(f1t) ** 2 + np.abs(f2t) ** 2
    g1t = np.conj(f1t) / Ft + f2t * bt
    g2t = np.conj(f2t) / Ft - f1t * bt
    mid = max(mid, float(np.max(np.abs(f1t * g1t + f2t * g2t - 1))))
    leak_z = _negative_z_mass(g1t, weight) + _negative_z_mass(g2t, weight)
    t1 = time.perf_counter()

    w_free = f1.degree()[1] <= 0 and f2.degree()[1] <= 0
    c = d = None
    res_w = 0.0
    if w_free:
        # f independent of w: dbar_w a = 0 and c = 0, so d = 0
        dt = np.zeros((nz, nw), dtype=complex)
    else:
        c = _stage_w(d1, d2, zg, wg, delta)
        dt = dbar.cauchy_boundary(c).T  # (w angle, z angle) -> (z angle, w angle)
        rows = _sample_rows(nz, 8)
        sub_c = PolarGridFunction(c.radii, nw, c.values[:, :, rows], c.radial_weights, c.variable_roles)
        sub_d = dbar.cauchy_transform_z(sub_c)
        res_w = dbar.dbar_residual(sub_d, sub_c)
        scale_w = 1.0 + float(np.max(np.abs(c.values)))
        if res_w > dbar_tol * scale_w:
            failures.append(f"stage W dbar residual {res_w:.3g} > {dbar_tol * scale_w:.3g}")
        if keep_intermediates:
            d = dbar.cauchy_transform_z(c)
        elif c is not None:
            c = None
    t2 = time.perf_counter()

    h1t = g1t + f2t * dt
    h2t = g2t - f1t * dt
    h1, leak1 = _project(h1t, weight)
    h2, leak2 = _project(h2t, weight)
    residual = weighted_norm(multiply(f1, h1) + multiply(f2, h2) - 1.0, weight)
    summary = {
        "grid": {"radial_nodes": zg.radial_nodes, "angular_n": nz,
                 "w_radial_nodes": wg.radial_nodes, "w_angular_n": nw},
        "min_F": min(fmin, float(Ft.min())),
        "mid_stage_error": mid,
        "stage_z_negative_mass": leak_z,
        "dbar_residual_z": res_z,
        "dbar_residual_w": res_w,
        "stage_w_skipped": w_free,
        "dbar_failures": failures,
        "leak": leak1 + leak2,
        "residual_norm": residual,
        "seconds_stage_z": t1 - t0,
        "seconds_stage_w": t2 - t1,
    }
    g = grids or dict.fromkeys(("F", "phi1", "phi2", "a", "b", "g1", "g2"))
    inter = CoronaIntermediates(g["F"], g["phi1"], g["phi2"], g["a"], g["b"], c, d, g["g1"], g["g2"], summary)
    return h1, h2, residual, leak1 + leak2, inter


def bezout_solve(f1: Series2D, f2: Series2D, delta: float, weight: Weight,
                 grid: CoronaGrid | None = None, tol: float = 1e-5,
                 dbar_tol: float = 1e-2, keep_intermediates: bool = True):
    """Solve f1 h1 + f2 h2 = 1 with h1, h2 analytic on the bidisc.

    Parameters
    ----------
    f1, f2 : Series2D
        Analytic polynomials with |f1|^2 + |f2|^2 >= delta^2 on the bidisc.
        They are scaled so that ||f1||^2 + ||f2||^2 <= 1 before solving and
        the solution is scaled back.
    delta : float
        Lower bound for (|f1|^2 + |f2|^2)^(1/2) on the unscaled data.
    grid : CoronaGrid
        Angular sizes cap the degree of h1, h2; they are doubled (up to
        1024) while the residual or the discarded mass exceeds ``tol`` or a
        dbar check fails.
    dbar_tol : float
        Bound on the finite-difference check of dbar b = a and dbar d = c,
        relative to 1 + max |a| (resp. |c|).

    Returns
    -------
    (BezoutSolution, CoronaIntermediates)

    Raises
    ------
    PreconditionError
        Bad input or F < delta^2 somewhere on the grid.
    ToleranceError
        A dbar check, the residual or the leak still fails at the largest
        grid.
    """
    _require_polynomial_pair(f1, f2)
    weight.require_positive()
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    grid = grid or CoronaGrid()
    scale = math.sqrt(weighted_norm(f1, weight) ** 2 + weighted_norm(f2, weight) ** 2)
    if scale == 0:
        raise PreconditionError("f1 = f2 = 0 has no Bezout solution")
    s = max(scale, 1.0)
    g1s, g2s, dls = f1 / s, f2 / s, delta / s
    if dls > 1:
        raise PreconditionError(f"delta = {delta} is impossible for the normalised pair")

    while True:
        h1, h2, residual, leak, inter = _solve_once(g1s, g2s, dls, weight, grid, dbar_tol,
                                                    keep_intermediates)
        log.info("bezout: grid %s residual %.3g leak %.3g", grid, residual, leak)
        failures = list(inter.summary["dbar_failures"])
        if residual > tol:
            failures.append(f"residual {residual:.3g} > tol {tol:.3g}")
        if leak > tol:
            failures.append(f"leak {leak:.3g} > tol {tol:.3g}")
        if not failures:
            break
        nxt = grid.doubled()
        if max(nxt.angular_n, nxt.w_angular_n) > MAX_ANGULAR:
            raise ToleranceError(f"at angular_n {grid.angular_n}: " + "; ".join(failures), partial=inter)
        grid = nxt

    h1, h2 = h1 / s, h2 / s
    residual = weighted_norm(multiply(f1, h1) + multiply(f2, h2) - 1.0, weight)
    inter.summary.update(normalisation=s, residual_norm_unscaled=residual)
    hn = math.sqrt(weighted_norm(h1, weight) ** 2 + weighted_norm(h2, weight) ** 2)
    cert = c2_certificate(min(dls, 1.0), weight, measured_norm=hn * s)
    sol = BezoutSolution(h1, h2, residual, leak / s, cert)
    return sol, inter


def mid_stage_error(f1: Series2D, f2: Series2D, inter: CoronaIntermediates) -> float:
    """max |f1 g1 + f2 g2 - 1| over the stage-Z grid of ``inter``.

    The stored g1, g2 belong to the normalised pair, so f1, f2 (the caller's
    data) are divided by the recorded normalisation first.
    """
    if inter.g1 is None:
        # run without kept grids: the solver measured the same quantity
        return float(inter.summary["mid_stage_error"])
    s = inter.summary.get("normalisation", 1.0)
    g = inter.g1
    nw = g.values.shape[2]
    zp = g.points()
    wb = np.exp(2j * np.pi * np.arange(nw) / nw)
    lhs = _Poly(f1 / s)(zp, wb) * g.values + _Poly(f2 / s)(zp, wb) * inter.g2.values
    return float(np.max(np.abs(lhs - 1)))


__all__ = [
    "BezoutSolution",
    "CoronaGrid",
    "CoronaIntermediates",
    "ConvergenceError",
    "bezout_solve",
    "c2_certificate",
    "c2_exponent",
    "delta_pair",
    "mid_stage_error",
]
