"""
Certified inversion in the torus algebra A_{alpha,beta}.

The inverse is assembled as the Neumann-type expansion

    f^{-1} = sum_{p >= 0} (f_rho - f)^p  f_rho^{-p-1}

with rho fixed by 2 (1 - rho)^gamma = delta / 3, so that sup |f - f_rho| on
the torus is at most delta / 3 whenever ||f|| <= 1.  Powers of f - f_rho are
exact polynomial products; the inverse powers of f_rho are obtained by
sampling on an N x N torus grid and transforming back, with N doubled until
two consecutive grids agree.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, PreconditionError, ToleranceError
from .series import (
    Series2D,
    Weight,
    multiply,
    rho_scale,
    torus_grid_values,
    weighted_norm,
)

log = logging.getLogger(__name__)

MAX_GRID = 2048
ROUNDOFF_FACTOR = 8.0


@dataclass(frozen=True)
class ConstantPolicy:
    fitted_constant: float | None
    reference: str


@dataclass(frozen=True)
class NormCertificate:
    """A measured norm next to the delta-power bound it is compared with.

    The multiplicative constant of every bound is left open; ``fitted_constant``
    is the value that would make the bound tight for this run.
    """

    measured_norm: float
    delta: float
    exponent: float
    constant_policy: ConstantPolicy
    universal_factor: float | None = None

    def __post_init__(self):
        if self.measured_norm < 0 or not 0 < self.delta <= 1:
            raise ValueError("invalid certificate values")

    @property
    def fitted_constant(self):
        return self.constant_policy.fitted_constant

    def bound(self, constant: float = 1.0) -> float:
        """constant * delta^-exponent."""
        return constant * self.delta ** (-self.exponent)


@dataclass
class NeumannTrace:
    rho: float
    terms_used: int = 0
    term_norms: list = field(default_factory=list)
    tail_bound: float = math.inf
    grid_sizes: list = field(default_factory=list)


def c1_exponent_2d(weight: Weight) -> float:
    """delta-power 3 + (1 + alpha + beta) / gamma of the two-variable inversion bound."""
    weight.require_positive()
    return 3.0 + (1.0 + weight.alpha + weight.beta) / weight.gamma


def c1_exponent_1d(alpha: float) -> float:
    """delta-power 2 + 1/alpha of the one-variable inversion bound, 0 < alpha < 1."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return 2.0 + 1.0 / alpha


def rho_for_delta(delta: float, weight: Weight) -> float:
    """Solve 2 (1 - rho)^gamma = delta / 3 exactly."""
    if not 0 < delta < 6:
        raise ValueError(f"delta must lie in (0, 6), got {delta}")
    return 1.0 - (delta / 6.0) ** (1.0 / weight.require_positive().gamma)


def dilation_gap(rho: float, weight: Weight) -> float:
    """Uniform bound 2 (1 - rho)^gamma on |f - f_rho| for ||f|| <= 1."""
    return 2.0 * (1.0 - rho) ** weight.gamma


def neumann_term_bound(p: int, rho: float, weight: Weight) -> float:
    """Upper bound p^(alpha+beta) (2 (1-rho)^gamma)^(p-2) on ||(f - f_rho)^p||, p >= 2."""
    if p < 2:
        raise ValueError("the bound is stated for p >= 2")
    return p ** (weight.alpha + weight.beta) * dilation_gap(rho, weight) ** (p - 2)


def spectral_min(f: Series2D, grid_n: int) -> float:
    """min |f| over the uniform grid_n x grid_n torus grid.

    This over-estimates inf |f| on the torus and converges to it as grid_n grows.
    """
    if grid_n < 4:
        raise ValueError("grid_n must be at least 4")
    return float(np.min(np.abs(torus_grid_values(f, grid_n))))


def _pow2_at_least(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _start_grid(f: Series2D):
    n0, n1, m0, m1 = f.bounds()
    span = max(n1 - n0, m1 - m0) + 1
    return max(16, _pow2_at_least(4 * span))


def _sampled_inverse(f, power, n):
    vals = torus_grid_values(f, n) ** (-power)
    coef = np.fft.fftshift(np.fft.fft2(vals)) / (n * n)
    # FFT round-off sits near eps * max|values| in every slot; over n^2 slots it
    # would swamp the weighted norm, so those entries are not kept
    floor = ROUNDOFF_FACTOR * np.finfo(float).eps * float(np.max(np.abs(vals)))
    coef[np.abs(coef) < floor] = 0
    return Series2D.from_dense(coef, -(n // 2), -(n // 2), analytic=False)


def inverse_power(f: Series2D, power: int, weight: Weight, tol: float,
                  start: int | None = None):
    """Coefficients of f^{-power} on the torus from grid sampling.

    Returns ``(series, n)`` where n is the grid size at which the n and 2n
    transforms differed by less than ``tol`` in weighted norm, or by less than
    the round-off level of the result when that is larger.  f must not vanish
    on the torus.
    """
    n = start or _start_grid(f)
    prev = _sampled_inverse(f, power, n)
    while True:
        if 2 * n > MAX_GRID:
            raise ConvergenceError(f"inverse power grid exceeded {MAX_GRID}", partial=prev)
        cur = _sampled_inverse(f, power, 2 * n)
        size = weighted_norm(cur, weight)
        if weighted_norm(cur - prev, weight) < max(tol, ROUNDOFF_FACTOR * np.finfo(float).eps * size):
            return cur, 2 * n
        prev, n = cur, 2 * n


def invert(f: Series2D, delta: float, weight: Weight, tol: float = 1e-8,
           max_terms: int = 200, check_grid: int | None = None):
    """Inverse of f in A_{alpha,beta} with a norm certificate.

    Parameters
    ----------
    f : Series2D
        Element with |f| >= delta on the torus.  ``||f|| <= 1`` is the
        normalisation under which the delta-power bound is stated; larger
        norms are accepted and flagged in the log.
    delta : float
        Lower bound for |f| on the torus, 0 < delta <= 1.
    tol : float
        Target for ``||f g - 1||``.
    max_terms : int
        Cap on the number of expansion terms.

    Returns
    -------
    (g, certificate, trace)

    Raises
    ------
    PreconditionError
        The sampled minimum of |f| is below delta.
    ConvergenceError
        ``max_terms`` reached before the tail estimate drops below tol.
    ToleranceError
        The measured residual misses tol.
    """
    weight.require_positive()
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if len(f) == 0:
        raise PreconditionError("cannot invert the zero series")
    grid = check_grid or max(256, _start_grid(f))
    smin = spectral_min(f, grid)
    if smin < delta * (1 - 1e-12):
        raise PreconditionError(f"min |f| on the {grid}x{grid} torus grid is {smin:.6g} < delta = {delta:.6g}")
    fnorm = weighted_norm(f, weight)
    if fnorm > 1 + 1e-12:
        log.info("||f|| = %.6g exceeds 1; the delta-power bound assumes ||f|| <= 1", fnorm)

    rho = rho_for_delta(delta, weight)
    # tiny gamma pushes (delta/6)^(1/gamma) below eps and rho rounds to 1;
    # the expansion then collapses to its first term, f^{-1} itself
    f_rho = f if rho >= 1 else rho_scale(f, rho)
    gap = (f_rho - f).as_full()
    trace = NeumannTrace(rho=rho)
    one = Series2D.constant(1.0, analytic=False)
    gap_power = one
    total = Series2D.zero(analytic=False)
    n = _start_grid(f_rho)
    inner_tol = tol / 10

    for p in range(max_terms):
        if p > 0:
            gap_power = multiply(gap_power, gap)
        if len(gap_power) == 0:
            trace.term_norms.append(0.0)
            trace.terms_used = p
            trace.tail_bound = 0.0
            break
        # the term error is at most ||gap^p|| times the error in f_rho^{-p-1}
        gap_norm = weighted_norm(gap_power, weight)
        inv, n = inverse_power(f_rho, p + 1, weight, inner_tol / gap_norm, start=max(16, n // 2))
        trace.grid_sizes.append(n)
        term = multiply(gap_power, inv)
        total = total + term
        tn = weighted_norm(term, weight)
        trace.term_norms.append(tn)
        trace.terms_used = p + 1
        if tn == 0.0:
            trace.tail_bound = 0.0
            break
        if p >= 1 and trace.term_norms[-2] > 0:
            ratio = tn / trace.term_norms[-2]
            if ratio < 1:
                trace.tail_bound = tn * ratio / (1 - ratio)
                if trace.tail_bound < tol:
                    break
    else:
        raise ConvergenceError(f"{max_terms} terms used, tail estimate {trace.tail_bound:.3g} >= tol", trace)

    residual = weighted_norm(multiply(f, total) - 1.0, weight)
    if residual > tol:
        raise ToleranceError(f"||f g - 1|| = {residual:.3g} exceeds tol = {tol:.3g}", trace)
    gnorm = weighted_norm(total, weight)
    exponent = c1_exponent_2d(weight)
    cert = NormCertificate(
        measured_norm=gnorm,
        delta=float(delta),
        exponent=exponent,
        constant_policy=ConstantPolicy(
            fitted_constant=gnorm * delta**exponent,
            reference="||f^-1|| <= c * delta^-(3 + (1 + alpha + beta) / gamma), c unspecified",
        ),
    )
    log.debug("invert: rho=%.6g terms=%d residual=%.3g", rho, trace.terms_used, residual)
    return total, cert, trace


def certificate_record(cert: NormCertificate, trace: NeumannTrace | None = None, **extra) -> dict:
    """Flat record of a certificate (and optionally its trace) for serialisation."""
    rec = {
        "measured_norm": cert.measured_norm,
        "delta": cert.delta,
        "exponent": cert.exponent,
        "fitted_constant": cert.fitted_constant,
        "reference": cert.constant_policy.reference,
    }
    if cert.universal_factor is not None:
        rec["universal_factor"] = cert.universal_factor
    if trace is not None:
        rec.update(terms_used=trace.terms_used, rho=trace.rho, tail_bound=trace.tail_bound,
                   term_norms=list(trace.term_norms))
    rec.update(extra)
    return rec


def dumps_certificate(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def trace_dict(trace: NeumannTrace) -> dict:
    return asdict(trace)
