"""Running-extremum coefficient envelopes.

Every separation bound is driven by a pair of functions on [0, T]:

* ``lower[n]``: running infimum over s in [0, t_n] of a coefficient,
* ``upper[n]``: running supremum.

For a linear right-hand side a(t)*x the coefficient is a(t).  For a
nonlinear f with f(t, 0) = 0 it is the quotient f(s, x)/x, and around a
reference solution x1 it is the shifted quotient
(f(s, x + x1(s)) - f(s, x1(s)))/x.  Extrema over x cannot be taken over all
of R \\ {0} for a black-box f; they are taken over a :class:`SamplingBox`
and are therefore inner estimates of the true envelope.

Extrema in time are found on the grid and then refined with a bounded
scalar minimizer inside the cells next to each discrete local extremum, so
smooth coefficients are resolved to ~1e-15 independent of the grid.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import InvalidParameterError, NegativeLipschitzError, NonvanishingAtZeroError
from .solvers import Trajectory

__all__ = [
    "KINDS",
    "CoeffEnvelope",
    "SamplingBox",
    "closed_form_envelope",
    "linear_coeff_envelope",
    "lipschitz_from_envelope",
    "nonlinear_coeff_envelope",
    "running_sup_lipschitz",
    "shifted_coeff_envelope",
]

KINDS = ("lipschitz-only", "linear", "nonlinear-sampled", "shifted-sampled", "closed-form")

ZERO_TOL = 1e-12
REFINE_XATOL = 1e-10
_CHUNK = 1 << 20


@dataclasses.dataclass(frozen=True)
class CoeffEnvelope:
    times: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kind: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown envelope kind {self.kind!r}")
        if not (times.ndim == 1 and times.shape == lower.shape == upper.shape):
            raise InvalidParameterError("times, lower and upper must be 1-d arrays of equal length")
        if np.any(np.diff(lower) > 0):
            raise InvalidParameterError("lower envelope must be non-increasing")
        if np.any(np.diff(upper) < 0):
            raise InvalidParameterError("upper envelope must be non-decreasing")
        if np.any(lower > upper):
            raise InvalidParameterError("lower envelope exceeds upper envelope")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def at_end(self):
        """(lower, upper) at the last grid time."""
        return float(self.lower[-1]), float(self.upper[-1])


@dataclasses.dataclass(frozen=True)
class SamplingBox:
    """State samples for inf/sup over x: ``n_x`` equispaced points in
    [x_min, x_max] with |x| < deadzone removed."""

    x_min: float = -10.0
    x_max: float = 10.0
    deadzone: float = 1e-4
    n_x: int = 2001

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise InvalidParameterError("SamplingBox needs x_min < x_max")
        if not self.deadzone > 0:
            raise InvalidParameterError("deadzone must be positive")
        if self.n_x < 2:
            raise InvalidParameterError("n_x must be >= 2")

    def samples(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n_x)
        x = x[np.abs(x) >= self.deadzone]
        if x.size == 0:
            raise InvalidParameterError("no samples left outside the deadzone")
        return x


def _vectorize(fn, nargs):
    """Wrap ``fn`` so that it maps broadcast arrays to an array of the broadcast shape."""

    def call(*args):
        shape = np.broadcast(*args).shape
        try:
            out = np.asarray(fn(*args), dtype=float)
            if out.shape != shape:
                out = np.broadcast_to(out, shape)
        except (TypeError, ValueError):
            out = np.vectorize(fn, otypes=[float])(*args)
        return np.array(out, dtype=float)

    return call


def _refined_running(fn, times, samples, sense):
    """Running max (sense=+1) or min (sense=-1) of fn over [0, t_n].

    ``samples`` = fn(times).  Cells adjacent to a discrete local extremum
    are searched with a bounded minimizer.
    """
    g = sense * samples
    n = g.size
    cell = np.maximum(g[:-1], g[1:])
    if n >= 3:
        mid = g[1:-1]
        left, right = g[:-2], g[2:]
        peak = (mid >= left) & (mid >= right) & ((mid > left) | (mid > right))
        for i in np.nonzero(peak)[0] + 1:
            for k in (i - 1, i):
                a, b = times[k], times[k + 1]
                res = optimize.minimize_scalar(
                    lambda t: -sense * float(fn(t)),
                    bounds=(a, b),
                    method="bounded",
                    options={"xatol": REFINE_XATOL},
                )
                if math.isfinite(res.fun):
                    cell[k] = max(cell[k], -res.fun)
    running = np.maximum.accumulate(np.concatenate([g[:1], cell]))
    return sense * running


def running_sup_lipschitz(L: Callable, times) -> CoeffEnvelope:
    """L*(t_n) = max over [0, t_n] of a Lipschitz bound L(t); lower = -upper."""
    times = np.asarray(times, dtype=float)
    Lv = _vectorize(L, 1)
    samples = Lv(times)
    if np.any(samples < 0):
        t_bad = times[np.argmin(samples)]
        raise NegativeLipschitzError(f"Lipschitz bound is negative at t={t_bad!r}")
    upper = _refined_running(lambda t: Lv(np.asarray(t)), times, samples, +1)
    return CoeffEnvelope(times, -upper, upper, "lipschitz-only")


def linear_coeff_envelope(a: Callable, times) -> CoeffEnvelope:
    """Running minimum and maximum of the coefficient a(t) of f(t, x) = a(t)*x."""
    times = np.asarray(times, dtype=float)
    av = _vectorize(a, 1)
    samples = av(times)
    fn = lambda t: av(np.asarray(t))  # noqa: E731
    lower = _refined_running(fn, times, samples, -1)
    upper = _refined_running(fn, times, samples, +1)
    return CoeffEnvelope(times, lower, upper, "linear")


def lipschitz_from_envelope(env: CoeffEnvelope) -> CoeffEnvelope:
    """L*(t) = max(-lower, upper): the running max of |coefficient|.

    For f = a(t)*x this is exactly the running max of L(t) = |a(t)|.
    """
    L = np.maximum(-env.lower, env.upper)
    return CoeffEnvelope(env.times, -L, L, "lipschitz-only")


def closed_form_envelope(times, lower, upper) -> CoeffEnvelope:
    """Envelope from known functions (or arrays) of t; running extrema are applied."""
    times = np.asarray(times, dtype=float)
    lo = _vectorize(lower, 1)(times) if callable(lower) else np.asarray(lower, dtype=float)
    up = _vectorize(upper, 1)(times) if callable(upper) else np.asarray(upper, dtype=float)
    lo = np.broadcast_to(lo, times.shape)
    up = np.broadcast_to(up, times.shape)
    return CoeffEnvelope(
        times, np.minimum.accumulate(lo), np.maximum.accumulate(up), "closed-form"
    )


def _quotient_extrema(q, times, x):
    """Per-time min and max over x of q(t, x), evaluated in row chunks."""
    rows = max(1, _CHUNK // x.size)
    qmin = np.empty(times.size)
    qmax = np.empty(times.size)
    for start in range(0, times.size, rows):
        block = q(times[start : start + rows, None], x[None, :])
        qmin[start : start + rows] = block.min(axis=1)
        qmax[start : start + rows] = block.max(axis=1)
    return qmin, qmax


def nonlinear_coeff_envelope(f: Callable, times, box: SamplingBox | None = None) -> CoeffEnvelope:
    """Sampled running inf/sup of f(s, x)/x for f with f(t, 0) = 0.

    The sampled infimum is >= the true one and the sampled supremum <= the
    true one.  Raises :class:`NonvanishingAtZeroError` if |f(t, 0)| exceeds
    1e-12 anywhere on the grid.
    """
    box = box or SamplingBox()
    times = np.asarray(times, dtype=float)
    fv = _vectorize(f, 2)
    at_zero = np.abs(fv(times, np.zeros_like(times)))
    if np.max(at_zero) > ZERO_TOL:
        t_bad = times[np.argmax(at_zero)]
        raise NonvanishingAtZeroError(f"|f(t, 0)| = {np.max(at_zero):.3g} at t={t_bad!r}")
    x = box.samples()

    def q(t, xs):
        return fv(t, xs) / xs

    qmin, qmax = _quotient_extrema(q, times, x)
    lower = _refined_running(lambda t: q(np.asarray(t), x).min(), times, qmin, -1)
    upper = _refined_running(lambda t: q(np.asarray(t), x).max(), times, qmax, +1)
    return CoeffEnvelope(times, lower, upper, "nonlinear-sampled")


def shifted_coeff_envelope(f: Callable, x1: Trajectory, box: SamplingBox | None = None) -> CoeffEnvelope:
    """Sampled running inf/sup of (f(s, x + x1(s)) - f(s, x1(s)))/x on the grid of ``x1``.

    The increment actually represented, (x1 + x) - x1, is used as the
    denominator so that rounding of the shifted state does not leak into
    the quotient.
    """
    box = box or SamplingBox()
    fv = _vectorize(f, 2)
    x = box.samples()
    times = x1.times
    qmin = np.empty(times.size)
    qmax = np.empty(times.size)
    rows = max(1, _CHUNK // x.size)
    for start in range(0, times.size, rows):
        t = times[start : start + rows, None]
        base = x1.values[start : start + rows, None]
        shifted = base + x[None, :]
        dx = shifted - base
        with np.errstate(invalid="ignore", divide="ignore"):
            quot = (fv(t, shifted) - fv(t, base)) / dx
        quot = np.where(dx != 0.0, quot, np.nan)
        qmin[start : start + rows] = np.nanmin(quot, axis=1)
        qmax[start : start + rows] = np.nanmax(quot, axis=1)
    lower = np.minimum.accumulate(qmin)
    upper = np.maximum.accumulate(qmax)
    return CoeffEnvelope(times, lower, upper, "shifted-sampled")
