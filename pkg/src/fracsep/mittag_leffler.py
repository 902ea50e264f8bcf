"""Real-argument Mittag-Leffler functions.

    E_{alpha,beta}(z) = sum_{k>=0} z**k / Gamma(alpha*k + beta),   E_alpha = E_{alpha,1}

Three evaluation branches are combined in :func:`ml2`:

* the defining power series, summed with :func:`math.fsum`.  Used for
  moderate positive arguments and for negative arguments as long as the
  alternating series does not cancel by more than ``1e3``;
* the asymptotic expansion for ``|z| >= switch_point(alpha)``, truncated at
  its smallest term (at most 10 algebraic terms);
* numerical inversion of the Laplace transform ``s**(alpha-beta) / (s**alpha - z)``
  with the trapezoidal rule on a parabolic Hankel contour.  This covers the
  negative band where the series has lost all digits and the asymptotic
  expansion is not yet accurate.

Results overflowing double precision saturate to ``inf``.  Target accuracy
is a relative error of 1e-10 for ``0 < alpha <= 1`` and ``beta > 0``.
"""

from __future__ import annotations

import functools
import math
import sys
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError, InvalidRegimeError

__all__ = [
    "SeriesInfo",
    "ml",
    "ml2",
    "ml_array",
    "ml_asymptotic",
    "ml_series_oracle",
    "rgamma",
    "switch_point",
]

LOG_MAX = math.log(sys.float_info.max)

SERIES_TAIL = 1e-18
LOW_CONFIDENCE = 1e6
MAX_ASYMPTOTIC_TERMS = 10
OVERLAP = 5.0

# negative axis: accept the series only while sum|t_k| <= this * |sum t_k|
_SERIES_CANCEL_MAX = 1e3
# positive axis: z**(1/alpha) beyond which the exponential term dominates
_POSITIVE_SERIES_RMAX = 40.0
_ASYMPTOTIC_RTOL = 1e-13

# parabolic contour s(u) = mu*(1 + i*u)**2, trapezoidal step in u
_CONTOUR_MU = 1.0
_CONTOUR_H = 0.08
_CONTOUR_EXP_CUTOFF = 40.0
_POLE_CLEARANCE = 0.45


def rgamma(x: float) -> float:
    """Reciprocal gamma function, exactly 0 at the poles of Gamma."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    try:
        g = math.gamma(x)
    except OverflowError:
        g = math.inf
    if g != 0.0 and math.isfinite(g):
        return 1.0 / g
    # outside the range of math.gamma: go through log|Gamma|
    sign = 1.0
    if x < 0 and math.floor(x) % 2 != 0:
        sign = -1.0
    log_r = -math.lgamma(x)
    return sign * (math.exp(log_r) if log_r < LOG_MAX else math.inf)


def _validate(alpha, beta, z):
    if not (0.0 < alpha < 2.0):
        raise InvalidParameterError(f"alpha must lie in (0, 2), got {alpha!r}")
    if not beta > 0.0:
        raise InvalidParameterError(f"beta must be positive, got {beta!r}")
    if math.isnan(z):
        raise InvalidParameterError("z is NaN")
    if math.isinf(z):
        raise InvalidParameterError("z must be finite")


class SeriesInfo(NamedTuple):
    value: float
    abs_sum: float
    n_terms: int

    @property
    def cancellation(self) -> float:
        if self.value == 0.0 or not math.isfinite(self.value):
            return math.inf
        return self.abs_sum / abs(self.value)

    @property
    def low_confidence(self) -> bool:
        return self.cancellation > LOW_CONFIDENCE


def _series_term(alpha, beta, z, k, logz):
    arg = alpha * k + beta
    if arg < 170.0 and k * logz < 700.0:
        return z**k * rgamma(arg)
    log_mag = k * logz - math.lgamma(arg)
    mag = math.exp(log_mag) if log_mag < LOG_MAX else math.inf
    return -mag if (z < 0 and k % 2) else mag


def _series(alpha, beta, z, max_terms):
    if z == 0.0:
        v = rgamma(beta)
        return SeriesInfo(v, abs(v), 1)
    z = float(z)
    logz = math.log(abs(z))
    # terms grow until alpha*k is roughly |z|**(1/alpha)
    k_peak = abs(z) ** (1.0 / alpha) / alpha
    terms = []
    running = 0.0
    for k in range(max_terms):
        t = _series_term(alpha, beta, z, k, logz)
        if not math.isfinite(t):
            # beyond double range: the sum is +inf, or hopelessly cancelled for z < 0
            return SeriesInfo(math.inf if z > 0 else math.nan, math.inf, k + 1)
        terms.append(t)
        running += t
        if k >= k_peak and abs(t) <= SERIES_TAIL * abs(running):
            break
    try:
        value = math.fsum(terms)
        abs_sum = math.fsum(abs(t) for t in terms)
    except OverflowError:
        return SeriesInfo(math.inf if z > 0 else math.nan, math.inf, len(terms))
    return SeriesInfo(value, abs_sum, len(terms))


def ml_series_oracle(alpha, beta, z, max_terms=10_000, full_output=False):
    """Truncated defining series of E_{alpha,beta}(z).

    Terms are accumulated with an exactly rounded sum and truncated once a
    term falls below 1e-18 of the running sum (past the largest term) or
    ``max_terms`` terms have been used.  On the negative axis the result is
    only trustworthy while the cancellation ``sum|t_k| / |sum t_k|`` stays
    small; with ``full_output=True`` a :class:`SeriesInfo` is returned whose
    ``low_confidence`` flag is set when the cancellation exceeds 1e6.
    """
    _validate(alpha, beta, z)
    if max_terms < 1:
        raise InvalidParameterError("max_terms must be >= 1")
    info = _series(alpha, beta, z, int(max_terms))
    return info if full_output else info.value


@functools.lru_cache(maxsize=256)
def switch_point(alpha: float, beta: float = 1.0) -> float:
    """|z| from which :func:`ml2` uses the asymptotic expansion (alpha < 1).

    At least ``max(10, (-ln 1e-16)**alpha)``, and large enough that the
    first omitted algebraic term on the negative axis is below 1e-13 of the
    truncated sum.
    """
    if not (0.0 < alpha < 1.0):
        return math.inf
    x = max(10.0, (-math.log(1e-16)) ** alpha)
    while True:
        terms = [-((-x) ** -k) * rgamma(beta - alpha * k) for k in range(1, MAX_ASYMPTOTIC_TERMS + 6)]
        kept = _optimal_truncation(terms[:MAX_ASYMPTOTIC_TERMS])
        omitted = next((abs(t) for t in terms[len(kept):] if t != 0.0), 0.0)
        if omitted <= _ASYMPTOTIC_RTOL * abs(math.fsum(kept)):
            return x
        x *= 1.02


def _optimal_truncation(terms):
    """Leading terms of a divergent series up to (and including) its smallest one."""
    kept = []
    prev = math.inf
    for t in terms:
        if t != 0.0:
            if abs(t) > prev:
                break
            prev = abs(t)
        kept.append(t)
    return kept


def _algebraic_part(alpha, beta, z, n_terms):
    terms = [-(z**-k) * rgamma(beta - alpha * k) for k in range(1, n_terms + 1)]
    return math.fsum(_optimal_truncation(terms))


def _asymptotic(alpha, beta, z, n_terms):
    algebraic = _algebraic_part(alpha, beta, z, n_terms)
    if z < 0:
        return algebraic
    log_main = z ** (1.0 / alpha) + (1.0 - beta) / alpha * math.log(z) - math.log(alpha)
    if log_main > LOG_MAX:
        return math.inf
    return math.exp(log_main) + algebraic


def ml_asymptotic(alpha, z, n_terms=MAX_ASYMPTOTIC_TERMS):
    """Large-|z| expansion of E_alpha(z) for 0 < alpha < 1.

    z < 0:  -sum_{k=1..n} z**(-k) / Gamma(1 - alpha*k)
    z > 0:  exp(z**(1/alpha)) / alpha plus the same algebraic terms

    The algebraic series is cut at its smallest term, and never uses more
    than ``n_terms`` (capped at 10) terms.  Arguments inside the overlap
    window below :func:`switch_point` are accepted; smaller ones raise
    :class:`InvalidRegimeError`.
    """
    _validate(alpha, 1.0, z)
    if not alpha < 1.0:
        raise InvalidParameterError("the asymptotic branch needs alpha < 1")
    if n_terms < 1:
        raise InvalidParameterError("n_terms must be >= 1")
    if abs(z) < switch_point(alpha) - OVERLAP:
        raise InvalidRegimeError(
            f"|z| = {abs(z)!r} is below the asymptotic regime "
            f"(>= {switch_point(alpha) - OVERLAP:.6g}) for alpha = {alpha!r}"
        )
    return _asymptotic(alpha, 1.0, z, min(int(n_terms), MAX_ASYMPTOTIC_TERMS))


def _principal_poles(alpha, z):
    # roots of s**alpha = z with |arg s| < pi
    r = abs(z) ** (1.0 / alpha)
    if z > 0:
        return [complex(r, 0.0)]
    theta = math.pi / alpha
    if theta >= math.pi:
        return []
    return [r * complex(math.cos(theta), math.sin(theta))]


def _contour_mu(poles):
    """Scale of the parabola, keeping poles away from the quadrature strip."""
    mu = _CONTOUR_MU
    for p in poles:
        # Im u of the pole's preimage under s = mu*(1+iu)**2 is 1 - Re sqrt(p/mu)
        q = (p / mu) ** 0.5
        if abs(1.0 - q.real) >= _POLE_CLEARANCE:
            continue
        c = (p**0.5).real
        inside = (c / (1.0 - _POLE_CLEARANCE - 0.05)) ** 2
        outside = (c / (1.0 + _POLE_CLEARANCE + 0.05)) ** 2
        mu = min((inside, outside), key=lambda m: abs(math.log(m / _CONTOUR_MU)))
    return mu


def _contour(alpha, beta, z):
    poles = _principal_poles(alpha, z) if z > 0 or alpha > 1.0 else []
    mu = _contour_mu(poles)
    h = _CONTOUR_H
    umax = math.sqrt(1.0 + (mu + _CONTOUR_EXP_CUTOFF) / mu)
    w = 1.0 + 1j * h * np.arange(int(umax / h) + 2)
    s = mu * w * w
    g = np.exp(s) * s ** (alpha - beta) / (s**alpha - z) * w
    g[0] *= 0.5
    value = 2.0 * h * mu / math.pi * float(np.real(g.sum()))
    for p in poles:
        # residues of poles to the right of the parabola
        if p.real > mu - p.imag**2 / (4.0 * mu):
            res = p ** (1.0 - beta) * np.exp(p) / alpha
            value += res.real if p.imag == 0.0 else 2.0 * res.real
    return value


def ml2(alpha: float, beta: float, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z."""
    alpha, beta, z = float(alpha), float(beta), float(z)
    _validate(alpha, beta, z)
    if z == 0.0:
        return rgamma(beta)
    if alpha == 1.0 and beta == 1.0:
        return math.exp(z) if z < LOG_MAX else math.inf
    r = abs(z) ** (1.0 / alpha)
    if z > 0:
        if r <= 8.0:
            return _series(alpha, beta, z, 100_000).value
        log_main = r + (1.0 - beta) / alpha * math.log(z) - math.log(alpha)
        if log_main > LOG_MAX:
            return math.inf
        if alpha > 1.0:
            # the other poles add oscillating terms of size exp(r*cos(2*pi/alpha))
            return _contour(alpha, beta, z)
        if r > _POSITIVE_SERIES_RMAX or z >= switch_point(alpha, beta):
            return _asymptotic(alpha, beta, z, MAX_ASYMPTOTIC_TERMS)
        return _series(alpha, beta, z, 100_000).value
    if alpha < 1.0 and -z >= switch_point(alpha, beta):
        return _asymptotic(alpha, beta, z, MAX_ASYMPTOTIC_TERMS)
    if r <= 8.0:
        info = _series(alpha, beta, z, 10_000)
        if info.abs_sum <= _SERIES_CANCEL_MAX * abs(info.value):
            return info.value
    return _contour(alpha, beta, z)


def ml(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) = E_{alpha,1}(z)."""
    return ml2(alpha, 1.0, z)


def ml_array(alpha, z, beta=1.0) -> np.ndarray:
    """Elementwise :func:`ml2` over an array of arguments."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    flat = out.reshape(-1)
    for i, zi in enumerate(z.reshape(-1)):
        flat[i] = ml2(alpha, beta, zi)
    return out
