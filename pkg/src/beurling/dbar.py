"""
Functions on polar grids of the disc and the Cauchy transform

    b(z) = -(1/pi) \\int_D a(xi) / (xi - z) dA(xi),      dbar_z b = a.

Nothing here discretises the singular kernel.  Writing a(r e^{it}) =
sum_k a_k(r) e^{ikt}, mode k of a feeds mode k-1 of b through

    b_{k-1}(r) =  2 \\int_0^r a_k(s) (s/r)^{1-k} ds      (k <= 0)
    b_{k-1}(r) = -2 \\int_r^1 a_k(s) (r/s)^{k-1} ds      (k >= 1)

and on the unit circle only the k <= 0 branch survives, giving the boundary
coefficients  b^(n) = 2 \\int_0^1 a_{n+1}(r) r^{-n} dr  for n < 0 and 0
otherwise.  Radial integrals use Gauss-Legendre nodes on (0, 1); the angular
decomposition is an FFT.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .series import Series2D, evaluate


def gauss_legendre_01(n: int):
    """Gauss-Legendre nodes and weights mapped to (0, 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _is_pow2(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid r_j e^{2 pi i k / angular_n}, r_j Gauss-Legendre on (0, 1)."""

    radial_nodes: int = 64
    angular_n: int = 256

    def __post_init__(self):
        if self.radial_nodes < 1:
            raise ValueError("radial_nodes must be positive")
        if self.angular_n < 8 or not _is_pow2(self.angular_n):
            raise ValueError(f"angular_n must be a power of two >= 8, got {self.angular_n}")

    @property
    def radii(self):
        return gauss_legendre_01(self.radial_nodes)[0]

    @property
    def weights(self):
        return gauss_legendre_01(self.radial_nodes)[1]

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.angular_n) / self.angular_n

    def points(self):
        """Complex nodes, shape (radial_nodes, angular_n)."""
        return self.radii[:, None] * np.exp(1j * self.angles)[None, :]


@dataclass(frozen=True, eq=False)
class PolarGridFunction:
    """Samples on a polar grid in z, optionally tensored with a second variable.

    ``values`` has shape ``(len(radii), angular_n, *rest)``.  ``rest`` is empty
    for a function of z alone, ``(n_w,)`` for torus angles in w, and
    ``(n_s, n_w)`` for a polar grid in w.  ``variable_roles`` records the
    layout, e.g. ``{"z": "polar", "w": "torus"}``.
    """

    radii: np.ndarray
    angular_n: int
    values: np.ndarray
    radial_weights: np.ndarray | None = None
    variable_roles: dict = field(default_factory=lambda: {"z": "polar"})

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.angular_n < 8 or not _is_pow2(self.angular_n):
            raise ValueError(f"angular_n must be a power of two >= 8, got {self.angular_n}")
        if radii.ndim != 1 or np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] > 1:
            raise ValueError("radii must be strictly increasing in (0, 1]")
        if self.values.shape[:2] != (radii.size, self.angular_n):
            raise ValueError(f"values shape {self.values.shape} does not match grid")

    @property
    def shape(self):
        return self.values.shape

    def with_values(self, values):
        return PolarGridFunction(self.radii, self.angular_n, values, self.radial_weights,
                                 dict(self.variable_roles))

    def points(self):
        ang = 2 * np.pi * np.arange(self.angular_n) / self.angular_n
        return self.radii[:, None] * np.exp(1j * ang)[None, :]

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def conj(self):
        return self.with_values(np.conj(self.values))


def _vals(x):
    return x.values if isinstance(x, PolarGridFunction) else x


class GridEvaluationError(RuntimeError):
    def __init__(self, point, cause):
        super().__init__(f"evaluation failed at grid point {point!r}: {cause}")
        self.point = point


def sample(f, grid: PolarGrid, w=None) -> PolarGridFunction:
    """Evaluate f on ``grid`` (z variable), tensored with an optional w layout.

    ``w`` may be ``None`` (f is a function of z only), an int ``n`` (w on
    the n-th roots of unity) or a :class:`PolarGrid` for w.  ``f`` is a
    :class:`Series2D` or a vectorised callable.
    """
    zp = grid.points()
    if w is None:
        roles = {"z": "polar"}
        zz = zp
        args = (zz,)
    elif isinstance(w, PolarGrid):
        roles = {"z": "polar", "w": "polar"}
        wp = w.points()
        zz = zp[:, :, None, None]
        args = (zz, wp[None, None, :, :])
    else:
        roles = {"z": "polar", "w": "torus"}
        wp = np.exp(2j * np.pi * np.arange(int(w)) / int(w))
        zz = zp[:, :, None]
        args = (zz, wp[None, None, :])
    if isinstance(f, Series2D):
        func = (lambda z: evaluate(f, z, 0.0)) if w is None else (lambda z, ww: evaluate(f, z, ww))
    else:
        func = f
    try:
        vals = np.broadcast_to(np.asarray(func(*args), dtype=complex),
                               np.broadcast_shapes(*[np.shape(a) for a in args]))
        bad = ~np.isfinite(vals)
        if np.any(bad):
            first = tuple(int(i[0]) for i in np.nonzero(bad))
            raise GridEvaluationError(_point_at(args, first), "non-finite value")
    except GridEvaluationError:
        raise
    except Exception as exc:
        raise GridEvaluationError(_locate_failure(func, args), exc) from exc
    return PolarGridFunction(grid.radii, grid.angular_n, np.array(vals), grid.weights, roles)


def _point_at(args, index):
    full = np.broadcast_arrays(*args)
    return tuple(complex(a[index]) for a in full)


def _locate_failure(func, args):
    full = np.broadcast_arrays(*args)
    for index in np.ndindex(full[0].shape):
        pt = tuple(a[index] for a in full)
        try:
            func(*pt)
        except Exception:
            return tuple(complex(p) for p in pt)
    return None


# ---------------------------------------------------------------------------
# Cauchy transform


def _barycentric_matrix(nodes, targets):
    """Interpolation matrix P with P @ f(nodes) = p(targets) for the Lagrange interpolant."""
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / np.prod(diff, axis=1)
    bw /= np.max(np.abs(bw))
    d = targets[..., None] - nodes
    exact = d == 0
    d[exact] = 1.0
    tmp = bw / d
    mat = tmp / tmp.sum(axis=-1, keepdims=True)
    rows = np.any(exact, axis=-1)
    mat[rows] = exact[rows].astype(float)
    return mat


def _mode_matrices(radii, targets, angular_n):
    """Per-mode radial matrices M[k] with b_{k-1}(t_i) = sum_j M[k, i, j] a_k(r_j).

    ``radii`` are the sample radii, ``targets`` the radii where b is wanted;
    modes are in FFT order.  Each partial integral over [0, t_i] or [t_i, 1]
    gets its own Gauss-Legendre rule, and a_k is carried there by polynomial
    interpolation through the sample radii.
    """
    nr = radii.size
    t = np.asarray(targets, dtype=float)[:, None]
    x, w = gauss_legendre_01(nr)
    s_in, w_in = t * x, t * w
    s_out, w_out = t + (1 - t) * x, (1 - t) * w
    p_in = _barycentric_matrix(radii, s_in)
    p_out = _barycentric_matrix(radii, s_out)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_in = np.where(t > 0, s_in / np.where(t > 0, t, 1), 0.0)
    ratio_out = t / s_out
    modes = np.fft.fftfreq(angular_n, 1.0 / angular_n).astype(int)
    mats = np.empty((angular_n, t.size, nr))
    neg = modes <= 0
    pw_in = (1 - modes[neg])[:, None, None].astype(float)
    mats[neg] = 2 * np.einsum("kiq,iqj->kij", w_in[None] * ratio_in[None] ** pw_in, p_in)
    pw_out = (modes[~neg] - 1)[:, None, None].astype(float)
    mats[~neg] = -2 * np.einsum("kiq,iqj->kij", w_out[None] * ratio_out[None] ** pw_out, p_out)
    return mats


@lru_cache(maxsize=8)
def _cauchy_operators(radii_key: tuple, angular_n: int):
    radii = np.array(radii_key)
    return _mode_matrices(radii, radii, angular_n)


def _require_radial(a: PolarGridFunction):
    if a.radii.size < 4:
        raise ValueError("the Cauchy transform needs at least 4 radial nodes")
    if a.radial_weights is None:
        raise ValueError("grid function carries no radial quadrature weights")


def cauchy_transform_z(a: PolarGridFunction) -> PolarGridFunction:
    """Cauchy transform in z on the grid of ``a``; trailing axes are passive."""
    _require_radial(a)
    n = a.angular_n
    mats = _cauchy_operators(tuple(a.radii.tolist()), n)
    modes_a = np.fft.fft(a.values, axis=1) / n
    out = np.einsum("kij,jk...->ik...", mats, modes_a)
    # mode k of a lands on mode k-1 of b
    out = np.roll(out, -1, axis=1)
    return a.with_values(np.fft.ifft(out, axis=1) * n)


def cauchy_transform_points(a: PolarGridFunction, points) -> np.ndarray:
    """Cauchy transform of ``a`` (a function of z alone) at arbitrary points of the closed disc."""
    _require_radial(a)
    if a.values.ndim != 2:
        raise ValueError("cauchy_transform_points needs a function of z alone")
    pts = np.asarray(points, dtype=complex)
    flat = pts.reshape(-1)
    r = np.abs(flat)
    if np.any(r > 1 + 1e-15):
        raise ValueError("points must lie in the closed unit disc")
    n = a.angular_n
    mats = _mode_matrices(a.radii, np.minimum(r, 1.0), n)
    modes_a = np.fft.fft(a.values, axis=1) / n
    coeff = np.einsum("kpj,jk->pk", mats, modes_a)
    k = np.fft.fftfreq(n, 1.0 / n)
    phase = np.exp(1j * np.outer(np.angle(flat), k - 1))
    return np.sum(coeff * phase, axis=1).reshape(pts.shape)


def boundary_mode_matrix(a: PolarGridFunction):
    """Angular Fourier coefficients of the boundary trace b(e^{it}, ...).

    Returns an array shaped like ``a.values[0]`` holding, in FFT order along
    axis 0, the coefficient of e^{int}; entries with n >= 0 are exactly zero.
    """
    _require_radial(a)
    n = a.angular_n
    modes_a = np.fft.fft(a.values, axis=1) / n
    k = np.fft.fftfreq(n, 1.0 / n).astype(int)
    out = np.zeros(a.values.shape[1:], dtype=complex)
    for idx in np.nonzero(k <= 0)[0]:
        kk = k[idx]
        if kk == -(n // 2):
            continue  # its image n = kk - 1 is not representable on this grid
        weights = 2 * a.radial_weights * a.radii ** (1 - kk)
        out[(idx - 1) % n] = np.tensordot(weights, modes_a[:, idx], axes=(0, 0))
    return out


def cauchy_boundary(a: PolarGridFunction) -> np.ndarray:
    """Boundary values b(e^{2 pi i j / n}, ...) of the Cauchy transform in z."""
    return np.fft.ifft(boundary_mode_matrix(a), axis=0) * a.angular_n


def cauchy_coefficients(a: PolarGridFunction, n: int, m: int) -> complex:
    """Fourier coefficient b^(n, m) of the boundary trace of the Cauchy transform.

    Needs the w axis of ``a`` on torus angles.  Zero for n >= 0; otherwise
    2 \\int_0^1 a^_{r}(n+1, m) r^{-n} dr by Gauss-Legendre in r.
    """
    if a.variable_roles.get("w") != "torus" or a.values.ndim != 3:
        raise ValueError("cauchy_coefficients needs a polar-z x torus-w grid function")
    nt, nw = a.values.shape[1:]
    if abs(n + 1) >= nt // 2 or abs(m) >= nw // 2 + (m < 0):
        raise ValueError(f"mode ({n}, {m}) exceeds the angular resolution")
    if n >= 0:
        return 0j
    _require_radial(a)
    modes = np.fft.fft2(a.values, axes=(1, 2)) / (nt * nw)
    integrand = modes[:, (n + 1) % nt, m % nw] * a.radii ** (-n)
    return complex(2 * np.dot(a.radial_weights, integrand))


# ---------------------------------------------------------------------------
# Verification


def dbar_residual(b: PolarGridFunction, a: PolarGridFunction) -> float:
    """max |dbar_z b - a| over interior radii, by centred differences.

    The Cartesian derivative is assembled from the polar grid through
    dbar = e^{it}/2 (d_r + (i/r) d_t); d_t is the periodic centred difference
    and d_r the three-point centred difference on the (non-uniform) radii, so
    every stencil point is a grid node and no interpolation is needed.
    """
    if b.values.shape != a.values.shape or not np.array_equal(b.radii, a.radii):
        raise ValueError("b and a must share a grid")
    r = b.radii
    if r.size < 3:
        raise ValueError("need at least 3 radii for interior differences")
    v = b.values
    dt = 2 * np.pi / b.angular_n
    d_theta = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2 * dt)
    h1 = (r[1:-1] - r[:-2]).reshape(-1, *([1] * (v.ndim - 1)))
    h2 = (r[2:] - r[1:-1]).reshape(-1, *([1] * (v.ndim - 1)))
    d_r = (h1**2 * v[2:] - h2**2 * v[:-2] + (h2**2 - h1**2) * v[1:-1]) / (h1 * h2 * (h1 + h2))
    rr = r[1:-1].reshape(-1, *([1] * (v.ndim - 1)))
    ang = np.exp(1j * 2 * np.pi * np.arange(b.angular_n) / b.angular_n)
    ang = ang.reshape(1, -1, *([1] * (v.ndim - 2)))
    dbar = 0.5 * ang * (d_r + 1j * d_theta[1:-1] / rr)
    return float(np.max(np.abs(dbar - a.values[1:-1]))) if dbar.size else 0.0


# ---------------------------------------------------------------------------
# Debug dumps: NumPy .npz with arrays radii, radial_weights, values and a JSON
# header string holding angular_n and variable_roles.


def save_grid_function(path, gf: PolarGridFunction):
    header = json.dumps({"angular_n": gf.angular_n, "variable_roles": gf.variable_roles,
                         "format": "beurling-grid", "version": 1}, sort_keys=True)
    weights = gf.radial_weights if gf.radial_weights is not None else np.zeros(0)
    np.savez(path, radii=gf.radii, radial_weights=weights, values=gf.values,
             header=np.array(header))


def load_grid_function(path) -> PolarGridFunction:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        weights = data["radial_weights"]
        return PolarGridFunction(data["radii"], header["angular_n"], data["values"],
                                 weights if weights.size else None, header["variable_roles"])
