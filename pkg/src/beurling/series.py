"""
Finitely supported Fourier / Taylor series in one and two variables.

A :class:`Series2D` stores the coefficients a_{n,m} of

    f(z, w) = sum a_{n,m} z^n w^m

sparsely (index pairs + complex values).  With ``analytic=True`` every index
is non-negative and the series is an element of the analytic Beurling algebra
on the bidisc; otherwise indices range over Z^2 and the series lives on the
torus.  Operations never mutate their inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import SeriesFormatError

PRUNE = 1e-300
FFT_THRESHOLD = 4096
FORMAT_NAME = "beurling-series"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Weight:
    """Polynomial weight (1+|n|)^alpha (1+|m|)^beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {val}")

    @property
    def gamma(self) -> float:
        return min(1.0, self.alpha, self.beta)

    def require_positive(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"alpha and beta must be positive, got {self}")
        return self

    def __call__(self, n, m):
        n = np.abs(np.asarray(n, dtype=float))
        m = np.abs(np.asarray(m, dtype=float))
        return (1.0 + n) ** self.alpha * (1.0 + m) ** self.beta


def _freeze(arr):
    arr.setflags(write=False)
    return arr


def _compress_2d(idx, coef):
    """Sum duplicate indices, sort lexicographically, drop tiny values."""
    idx = np.asarray(idx, dtype=np.int64).reshape(-1, 2)
    coef = np.asarray(coef, dtype=complex).reshape(-1)
    if idx.shape[0] == 0:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=complex)
    uniq, inv = np.unique(idx, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if uniq.shape[0] != idx.shape[0]:
        re = np.bincount(inv, weights=coef.real, minlength=uniq.shape[0])
        im = np.bincount(inv, weights=coef.imag, minlength=uniq.shape[0])
        coef = re + 1j * im
    else:
        out = np.empty(uniq.shape[0], dtype=complex)
        out[inv] = coef
        coef = out
    keep = np.abs(coef) >= PRUNE
    return uniq[keep], coef[keep]


class Series2D:
    """Finitely supported bivariate series.

    Parameters
    ----------
    terms : mapping (n, m) -> complex, optional
        Coefficients.  Duplicate handling is irrelevant for a mapping.
    analytic : bool
        Restrict the support to N x N.
    """

    __slots__ = ("_idx", "_coef", "analytic")
    __array_ufunc__ = None  # numpy scalars defer to our operators

    def __init__(self, terms=None, analytic=True):
        terms = {} if terms is None else dict(terms)
        idx = np.array(list(terms.keys()), dtype=np.int64).reshape(-1, 2)
        coef = np.array(list(terms.values()), dtype=complex)
        self._set(idx, coef, analytic)

    def _set(self, idx, coef, analytic):
        idx, coef = _compress_2d(idx, coef)
        if analytic and idx.size and idx.min() < 0:
            raise ValueError("analytic series cannot carry negative indices")
        self._idx = _freeze(idx)
        self._coef = _freeze(coef)
        self.analytic = bool(analytic)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_arrays(cls, idx, coef, analytic=True):
        obj = cls.__new__(cls)
        obj._set(idx, coef, analytic)
        return obj

    @classmethod
    def from_dense(cls, arr, n0=0, m0=0, analytic=None):
        """Build from a rectangular buffer whose [0, 0] entry is index (n0, m0)."""
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None]
        nn, mm = np.nonzero(np.abs(arr) >= PRUNE)
        idx = np.stack([nn + n0, mm + m0], axis=1)
        if analytic is None:
            analytic = n0 >= 0 and m0 >= 0
        return cls.from_arrays(idx, arr[nn, mm], analytic)

    @classmethod
    def constant(cls, c, analytic=True):
        return cls({(0, 0): c}, analytic)

    @classmethod
    def monomial(cls, n, m, c=1.0):
        return cls({(n, m): c}, analytic=(n >= 0 and m >= 0))

    @classmethod
    def zero(cls, analytic=True):
        return cls({}, analytic)

    @classmethod
    def from_1d(cls, s: "Series1D", variable="z"):
        idx = s.indices
        zeros = np.zeros_like(idx)
        pair = np.stack([idx, zeros] if variable == "z" else [zeros, idx], axis=1)
        return cls.from_arrays(pair, s.coefficients, s.analytic)

    # -- inspection -------------------------------------------------------

    @property
    def indices(self):
        return self._idx

    @property
    def coefficients(self):
        return self._coef

    @property
    def terms(self):
        return {(int(n), int(m)): complex(c) for (n, m), c in zip(self._idx, self._coef)}

    @property
    def support_kind(self):
        return "analytic" if self.analytic else "full"

    def __len__(self):
        return self._coef.shape[0]

    def __getitem__(self, key):
        n, m = key
        hit = np.nonzero((self._idx[:, 0] == n) & (self._idx[:, 1] == m))[0]
        return complex(self._coef[hit[0]]) if hit.size else 0j

    def bounds(self):
        """(n_min, n_max, m_min, m_max); all zero for the empty series."""
        if len(self) == 0:
            return 0, 0, 0, 0
        lo = self._idx.min(axis=0)
        hi = self._idx.max(axis=0)
        return int(lo[0]), int(hi[0]), int(lo[1]), int(hi[1])

    def degree(self):
        _, n1, _, m1 = self.bounds()
        return n1, m1

    def to_dense(self, shape=None):
        """Return ``(buffer, n0, m0)`` covering the support."""
        n0, n1, m0, m1 = self.bounds()
        if shape is None:
            shape = (n1 - n0 + 1, m1 - m0 + 1)
        buf = np.zeros(shape, dtype=complex)
        if len(self):
            buf[self._idx[:, 0] - n0, self._idx[:, 1] - m0] = self._coef
        return buf, n0, m0

    def dense_analytic(self, nz=None, nw=None):
        """Buffer with [n, m] holding a_{n,m}, anchored at the origin."""
        if not self.analytic:
            raise ValueError("dense_analytic needs an analytic series")
        _, n1, _, m1 = self.bounds()
        nz = n1 + 1 if nz is None else nz
        nw = m1 + 1 if nw is None else nw
        buf = np.zeros((nz, nw), dtype=complex)
        if len(self):
            keep = (self._idx[:, 0] < nz) & (self._idx[:, 1] < nw)
            buf[self._idx[keep, 0], self._idx[keep, 1]] = self._coef[keep]
        return buf

    def __repr__(self):
        shown = ", ".join(f"({n},{m}): {c:.6g}" for (n, m), c in list(self.terms.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"Series2D({{{shown}{more}}}, {self.support_kind})"

    def __eq__(self, other):
        if not isinstance(other, Series2D):
            return NotImplemented
        return (
            self.analytic == other.analytic
            and np.array_equal(self._idx, other._idx)
            and np.array_equal(self._coef, other._coef)
        )

    __hash__ = None

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return len(diff) == 0 or float(np.max(np.abs(diff.coefficients))) <= atol

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Series2D):
            return other
        if np.isscalar(other):
            return Series2D.constant(complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Series2D.from_arrays(
            np.concatenate([self._idx, other._idx]),
            np.concatenate([self._coef, other._coef]),
            self.analytic and other.analytic,
        )

    __radd__ = __add__

    def __neg__(self):
        return Series2D.from_arrays(self._idx, -self._coef, self.analytic)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return Series2D.from_arrays(self._idx, self._coef * complex(other), self.analytic)
        if isinstance(other, Series2D):
            return multiply(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / complex(other))
        return NotImplemented

    def __pow__(self, p):
        if not isinstance(p, (int, np.integer)) or p < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Series2D.constant(1.0, analytic=self.analytic)
        base = self
        while p:
            if p & 1:
                out = multiply(out, base)
            p >>= 1
            if p:
                base = multiply(base, base)
        return out

    def __call__(self, z, w):
        return evaluate(self, z, w)

    def conj_reflect(self):
        """Coefficients of conj(f) on the torus: a_{n,m} -> conj(a_{-n,-m})."""
        return Series2D.from_arrays(-self._idx, np.conj(self._coef), analytic=len(self) == 0)

    def nonneg_part(self):
        keep = (self._idx[:, 0] >= 0) & (self._idx[:, 1] >= 0)
        return Series2D.from_arrays(self._idx[keep], self._coef[keep], analytic=True)

    def as_full(self):
        return Series2D.from_arrays(self._idx, self._coef, analytic=False)


class Series1D:
    """Finitely supported one-variable series ``sum a_n z^n``."""

    __slots__ = ("_idx", "_coef", "analytic")
    __array_ufunc__ = None

    def __init__(self, terms=None, analytic=True):
        terms = {} if terms is None else dict(terms)
        idx = np.array([(n, 0) for n in terms.keys()], dtype=np.int64).reshape(-1, 2)
        coef = np.array(list(terms.values()), dtype=complex)
        self._set(idx, coef, analytic)

    def _set(self, idx2, coef, analytic):
        idx2, coef = _compress_2d(idx2, coef)
        if analytic and idx2.size and idx2[:, 0].min() < 0:
            raise ValueError("analytic series cannot carry negative indices")
        self._idx = _freeze(np.ascontiguousarray(idx2[:, 0]))
        self._coef = _freeze(coef)
        self.analytic = bool(analytic)

    @classmethod
    def from_arrays(cls, idx, coef, analytic=True):
        obj = cls.__new__(cls)
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        obj._set(np.stack([idx, np.zeros_like(idx)], axis=1), coef, analytic)
        return obj

    @classmethod
    def from_dense(cls, arr, n0=0):
        arr = np.asarray(arr, dtype=complex).reshape(-1)
        return cls.from_arrays(np.arange(arr.size) + n0, arr, analytic=n0 >= 0)

    @property
    def indices(self):
        return self._idx

    @property
    def coefficients(self):
        return self._coef

    @property
    def terms(self):
        return {int(n): complex(c) for n, c in zip(self._idx, self._coef)}

    def __len__(self):
        return self._coef.shape[0]

    def __getitem__(self, n):
        hit = np.nonzero(self._idx == n)[0]
        return complex(self._coef[hit[0]]) if hit.size else 0j

    def to_dense(self):
        if len(self) == 0:
            return np.zeros(1, dtype=complex), 0
        n0, n1 = int(self._idx.min()), int(self._idx.max())
        buf = np.zeros(n1 - n0 + 1, dtype=complex)
        buf[self._idx - n0] = self._coef
        return buf, n0

    def norm(self, alpha: float) -> float:
        return math.fsum((np.abs(self._coef) * (1.0 + np.abs(self._idx)) ** alpha).tolist())

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if len(self) == 0:
            return np.zeros_like(z)
        if np.any(self._idx < 0) and np.any(z == 0):
            raise ValueError("negative power evaluated at z = 0")
        powers = z[..., None] ** self._idx.astype(float)
        return powers @ self._coef

    def __mul__(self, other):
        if np.isscalar(other):
            return Series1D.from_arrays(self._idx, self._coef * complex(other), self.analytic)
        a, na = self.to_dense()
        b, nb = other.to_dense()
        out = Series1D.from_arrays(np.arange(a.size + b.size - 1) + na + nb, np.convolve(a, b),
                                   self.analytic and other.analytic)
        return out

    __rmul__ = __mul__

    def __sub__(self, other):
        return Series1D.from_arrays(
            np.concatenate([self._idx, other._idx]),
            np.concatenate([self._coef, -other._coef]),
            self.analytic and other.analytic,
        )

    def __repr__(self):
        shown = ", ".join(f"{n}: {c:.6g}" for n, c in list(self.terms.items())[:6])
        return f"Series1D({{{shown}{', ...' if len(self) > 6 else ''}}})"


# ---------------------------------------------------------------------------
# Operations


def weighted_norm(f: Series2D, weight: Weight) -> float:
    """sum |a_{n,m}| (1+|n|)^alpha (1+|m|)^beta, accumulated with fsum."""
    if len(f) == 0:
        return 0.0
    terms = np.abs(f.coefficients) * weight(f.indices[:, 0], f.indices[:, 1])
    return math.fsum(terms.tolist())


def multiply(f: Series2D, g: Series2D, fft_threshold: int = FFT_THRESHOLD) -> Series2D:
    """Coefficient convolution (pointwise product of the functions).

    Small products use a direct double loop over the supports; once
    ``len(f) * len(g)`` exceeds ``fft_threshold`` the dense buffers are
    convolved with an FFT.
    """
    analytic = f.analytic and g.analytic
    if len(f) == 0 or len(g) == 0:
        return Series2D.zero(analytic)
    if len(f) * len(g) <= fft_threshold:
        idx = (f.indices[:, None, :] + g.indices[None, :, :]).reshape(-1, 2)
        coef = (f.coefficients[:, None] * g.coefficients[None, :]).reshape(-1)
        return Series2D.from_arrays(idx, coef, analytic)
    a, na, ma = f.to_dense()
    b, nb, mb = g.to_dense()
    prod = signal.fftconvolve(a, b)
    return Series2D.from_dense(prod, na + nb, ma + mb, analytic)


def evaluate(f: Series2D, z, w):
    """Finite sum ``sum a_{n,m} z^n w^m``; broadcasts over array arguments."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    if len(f) == 0:
        return np.zeros(z.shape, dtype=complex)[()]
    n0, n1, m0, m1 = f.bounds()
    if (n0 < 0 and np.any(z == 0)) or (m0 < 0 and np.any(w == 0)):
        raise ValueError("negative exponent evaluated at 0")
    buf, _, _ = f.to_dense()
    zf, wf = z.reshape(-1), w.reshape(-1)
    zp = zf[:, None] ** np.arange(n0, n1 + 1, dtype=float)
    wp = wf[:, None] ** np.arange(m0, m1 + 1, dtype=float)
    vals = np.einsum("pi,ij,pj->p", zp, buf, wp)
    return vals.reshape(z.shape)[()]


def torus_grid_values(f: Series2D, nz: int, nw: int | None = None) -> np.ndarray:
    """Exact samples of f at (e^{2 pi i j/nz}, e^{2 pi i k/nw}), shape (nz, nw).

    Coefficients are folded modulo the grid size, which is exact at roots of
    unity, then one inverse FFT evaluates every node.
    """
    nw = nz if nw is None else nw
    buf = np.zeros((nz, nw), dtype=complex)
    if len(f):
        np.add.at(buf, (f.indices[:, 0] % nz, f.indices[:, 1] % nw), f.coefficients)
    return np.fft.ifft2(buf) * (nz * nw)


def coefficients_from_torus(values: np.ndarray, analytic=False) -> Series2D:
    """Inverse of :func:`torus_grid_values` for band-limited data.

    Indices are centred: ``[-n/2, n/2)`` per axis, or ``[0, n)`` when
    ``analytic`` is set.
    """
    nz, nw = values.shape
    coef = np.fft.fft2(values) / (nz * nw)
    if analytic:
        return Series2D.from_dense(coef, 0, 0, analytic=True)
    coef = np.fft.fftshift(coef)
    return Series2D.from_dense(coef, -(nz // 2), -(nw // 2), analytic=False)


def rho_scale(f: Series2D, rho: float) -> Series2D:
    """f_rho: multiply a_{n,m} by rho^(|n|+|m|)."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    k = np.abs(f.indices).sum(axis=1).astype(float)
    return Series2D.from_arrays(f.indices, f.coefficients * rho**k, f.analytic)


def partial_derivative(f: Series2D, k_z: int = 1, k_w: int = 0) -> Series2D:
    """Mixed partial d^{k_z + k_w} f / dz^{k_z} dw^{k_w}."""
    if not f.analytic:
        raise ValueError("partial_derivative needs an analytic series")
    if k_z < 0 or k_w < 0:
        raise ValueError("derivative orders must be non-negative")
    n, m = f.indices[:, 0], f.indices[:, 1]
    keep = (n >= k_z) & (m >= k_w)
    factors = np.array(
        [float(math.perm(int(a), k_z) * math.perm(int(b), k_w)) for a, b in zip(n[keep], m[keep])]
    )
    idx = np.stack([n[keep] - k_z, m[keep] - k_w], axis=1)
    return Series2D.from_arrays(idx, f.coefficients[keep] * factors, analytic=True)


def slice(f: Series2D, which: str, point: complex) -> Series1D:  # noqa: A001
    """One-variable section: ``fix_w`` gives f(., point), ``fix_z`` gives f(point, .)."""
    if abs(point) > 1 + 1e-15:
        raise ValueError("slice point must lie in the closed unit disc")
    if which == "fix_w":
        keep_axis, fixed_axis = 0, 1
    elif which == "fix_z":
        keep_axis, fixed_axis = 1, 0
    else:
        raise ValueError("which must be 'fix_w' or 'fix_z'")
    if len(f) == 0:
        return Series1D({}, f.analytic)
    fixed = f.indices[:, fixed_axis]
    if np.any(fixed < 0) and point == 0:
        raise ValueError("negative exponent evaluated at 0")
    coef = f.coefficients * complex(point) ** fixed.astype(float)
    return Series1D.from_arrays(f.indices[:, keep_axis], coef, f.analytic)


def local_division(f: Series2D, lam: complex) -> Series2D:
    """Difference quotient (f(z, w) - f(lam, w)) / (z - lam) as a series.

    z^n contributes z^{n-1} + z^{n-2} lam + ... + lam^{n-1}, so the output
    coefficient at z^k is sum_{n>k} a_{n,m} lam^{n-1-k}; it is built by the
    backward recurrence c_k = a_{k+1} + lam c_{k+1}.
    """
    if abs(lam) >= 1:
        raise ValueError(f"|lambda| must be < 1, got {abs(lam)}")
    if not f.analytic:
        raise ValueError("local_division needs an analytic series")
    if len(f) == 0:
        return Series2D.zero()
    buf = f.dense_analytic()
    nz = buf.shape[0]
    out = np.zeros((max(nz - 1, 1), buf.shape[1]), dtype=complex)
    if nz > 1:
        out[nz - 2] = buf[nz - 1]
        for k in range(nz - 3, -1, -1):
            out[k] = buf[k + 1] + lam * out[k + 1]
    return Series2D.from_dense(out, 0, 0, analytic=True)


# ---------------------------------------------------------------------------
# Coefficient files
#
# A UTF-8 JSON document:
#   {"format": "beurling-series", "version": 1,
#    "alpha": <float>, "beta": <float>, "support": "analytic" | "full",
#    "terms": [{"n": <int>, "m": <int>, "re": <float>, "im": <float>}, ...]}
# written with one term record per line.  Floats use repr, so reading then
# writing reproduces the file exactly for files this module wrote.


def dumps_series(f: Series2D, weight: Weight) -> str:
    head = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "alpha": float(weight.alpha),
        "beta": float(weight.beta),
        "support": f.support_kind,
    }
    lines = ["{"]
    for key, val in head.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(val)},")
    lines.append('  "terms": [')
    recs = [
        json.dumps({"n": int(n), "m": int(m), "re": float(c.real), "im": float(c.imag)})
        for (n, m), c in zip(f.indices, f.coefficients)
    ]
    lines.append(",\n".join("    " + r for r in recs))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(line for line in lines if line) + "\n"


def _field(doc, key, types, lineno=None):
    if key not in doc:
        raise SeriesFormatError(f"missing field {key!r}", lineno)
    val = doc[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise SeriesFormatError(f"field {key!r} has wrong type {type(val).__name__}", lineno)
    return val


def _term_line(text, k):
    # 1-based line of the k-th term record, for error messages
    start = text.find('"terms"')
    pos = start
    for _ in range(k + 1):
        pos = text.find('"n"', pos + 1)
        if pos < 0:
            return None
    return text.count("\n", 0, pos) + 1


def loads_series(text: str):
    """Parse a coefficient document; returns ``(series, weight)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SeriesFormatError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise SeriesFormatError("top-level value must be an object", 1)
    if doc.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise SeriesFormatError(f"unknown format {doc.get('format')!r}")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise SeriesFormatError(f"unsupported version {doc.get('version')!r}")
    alpha = float(_field(doc, "alpha", (int, float)))
    beta = float(_field(doc, "beta", (int, float)))
    support = _field(doc, "support", str)
    if support not in ("analytic", "full"):
        raise SeriesFormatError(f"support must be 'analytic' or 'full', got {support!r}")
    terms = _field(doc, "terms", list)
    idx, coef = [], []
    for k, rec in enumerate(terms):
        line = _term_line(text, k)
        if not isinstance(rec, dict):
            raise SeriesFormatError(f"term {k} is not an object", line)
        n = _field(rec, "n", int, line)
        m = _field(rec, "m", int, line)
        re = float(_field(rec, "re", (int, float), line))
        im = float(_field(rec, "im", (int, float), line))
        if support == "analytic" and (n < 0 or m < 0):
            raise SeriesFormatError(f"negative index ({n}, {m}) in analytic series", line)
        idx.append((n, m))
        coef.append(complex(re, im))
    try:
        weight = Weight(alpha, beta)
    except ValueError as exc:
        raise SeriesFormatError(str(exc)) from None
    series = Series2D.from_arrays(np.array(idx, dtype=np.int64).reshape(-1, 2),
                                  np.array(coef, dtype=complex), support == "analytic")
    return series, weight


def write_series(path, f: Series2D, weight: Weight):
    Path(path).write_text(dumps_series(f, weight), encoding="utf-8")


def read_series(path):
    return loads_series(Path(path).read_text(encoding="utf-8"))
