"""Lower and upper bounds for the separation of two solutions.

All bounds have the form  initial separation * E_alpha(c(t) * t**alpha)
with c a running extremum from :mod:`fracsep.envelope`:

========================  ======================  ======================
function                  lower uses              upper uses
========================  ======================  ======================
classic_bounds            -L*(t)                  +L*(t)
linear_bounds             a_*(t) (running min)    a^*(t) (running max)
general_separation_bounds shifted running min     shifted running max
========================  ======================  ======================

:func:`nonlinear_zero_bounds` and :func:`separation_bounds` cover
right-hand sides with f(t, 0) = 0 and bound a solution itself, or the
difference of two solutions by sign case of the initial values.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .envelope import CoeffEnvelope
from .errors import BoundaryZeroError, InvalidParameterError
from .mittag_leffler import ml_array

__all__ = [
    "PROVENANCES",
    "BoundEnvelope",
    "StabilityVerdict",
    "Verdict",
    "classic_bounds",
    "general_separation_bounds",
    "linear_bounds",
    "nonlinear_zero_bounds",
    "sandwich_mask",
    "separation_bounds",
    "stability_verdict",
]

PROVENANCES = ("classic", "linear-new", "nonlinear-zero", "separation-cases", "general-shifted")


@dataclasses.dataclass(frozen=True)
class BoundEnvelope:
    """Pointwise bounds on a grid; ``upper`` may contain ``inf``.

    For every provenance except ``nonlinear-zero`` the bounded quantity is a
    separation, so ``0 <= lower <= upper``.
    """

    times: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    provenance: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if self.provenance not in PROVENANCES:
            raise InvalidParameterError(f"unknown provenance {self.provenance!r}")
        if not (times.ndim == 1 and times.shape == lower.shape == upper.shape):
            raise InvalidParameterError("times, lower and upper must be 1-d arrays of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise InvalidParameterError("bounds contain NaN")
        if np.any(lower > upper):
            raise InvalidParameterError("lower bound exceeds upper bound")
        if self.provenance != "nonlinear-zero" and np.any(lower < 0):
            raise InvalidParameterError("separation bounds must be nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


def _require_kind(env, kinds, name):
    if env.kind not in kinds:
        raise InvalidParameterError(f"{name} needs an envelope of kind {kinds}, got {env.kind!r}")


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha!r}")


def _ml_of(alpha, coeff, times):
    return ml_array(alpha, coeff * times**alpha)


def _ml_pair(alpha, lo_coeff, up_coeff, times):
    """E_alpha at the two coefficients; E_alpha is increasing, so an inversion
    between nearly equal arguments is rounding and is clipped."""
    e_lo = _ml_of(alpha, lo_coeff, times)
    e_up = _ml_of(alpha, up_coeff, times)
    return np.minimum(e_lo, e_up), e_up


def _scaled_pair(dx0, alpha, env, lo_coeff, up_coeff, provenance):
    _check_alpha(alpha)
    if not (dx0 >= 0 and math.isfinite(dx0)):
        raise InvalidParameterError(f"initial separation must be >= 0, got {dx0!r}")
    t = env.times
    if dx0 == 0:
        # identical initial values give identical solutions
        zero = np.zeros_like(t)
        return BoundEnvelope(t, zero, zero.copy(), provenance)
    e_lo, e_up = _ml_pair(alpha, lo_coeff, up_coeff, t)
    lower, upper = dx0 * e_lo, dx0 * e_up
    return BoundEnvelope(t, lower, upper, provenance)


def classic_bounds(dx0: float, alpha: float, lipschitz_env: CoeffEnvelope) -> BoundEnvelope:
    """dx0 * E_alpha(-+L*(t) t**alpha): the bounds that use only a Lipschitz constant."""
    _require_kind(lipschitz_env, ("lipschitz-only",), "classic_bounds")
    L = lipschitz_env.upper
    return _scaled_pair(dx0, alpha, lipschitz_env, -L, L, "classic")


def linear_bounds(dx0: float, alpha: float, coeff_env: CoeffEnvelope) -> BoundEnvelope:
    """dx0 * E_alpha(a_*(t) t**alpha) <= separation <= dx0 * E_alpha(a^*(t) t**alpha)."""
    _require_kind(coeff_env, ("linear", "closed-form"), "linear_bounds")
    return _scaled_pair(dx0, alpha, coeff_env, coeff_env.lower, coeff_env.upper, "linear-new")


def general_separation_bounds(x10: float, x20: float, alpha: float, shifted_env: CoeffEnvelope) -> BoundEnvelope:
    """Bounds on x2(t) - x1(t) from the envelope of the shifted quotient around x1."""
    _require_kind(shifted_env, ("shifted-sampled", "closed-form"), "general_separation_bounds")
    if not x10 < x20:
        raise InvalidParameterError(f"need x10 < x20, got {x10!r} >= {x20!r}")
    return _scaled_pair(
        x20 - x10, alpha, shifted_env, shifted_env.lower, shifted_env.upper, "general-shifted"
    )


def nonlinear_zero_bounds(x0: float, alpha: float, coeff_env: CoeffEnvelope) -> BoundEnvelope:
    """Bounds on the solution itself for f(t, 0) = 0.

    x0 > 0:  x0 E(a_* t^a) <= x(t) <= x0 E(a^* t^a)
    x0 < 0:  x0 E(a^* t^a) <= x(t) <= x0 E(a_* t^a)
    """
    _require_kind(coeff_env, ("nonlinear-sampled", "closed-form", "linear"), "nonlinear_zero_bounds")
    _check_alpha(alpha)
    if x0 == 0 or not math.isfinite(x0):
        raise InvalidParameterError("x0 must be finite and nonzero")
    t = coeff_env.times
    e_lo, e_up = _ml_pair(alpha, coeff_env.lower, coeff_env.upper, t)
    if x0 > 0:
        lower, upper = x0 * e_lo, x0 * e_up
    else:
        lower, upper = x0 * e_up, x0 * e_lo
    return BoundEnvelope(t, lower, upper, "nonlinear-zero")


def _difference(a, b):
    # a - b where inf - inf means "unbounded"
    with np.errstate(invalid="ignore"):
        d = a - b
    return d


def separation_bounds(x10: float, x20: float, alpha: float, coeff_env: CoeffEnvelope) -> BoundEnvelope:
    """Bounds on x2(t) - x1(t) for f(t, 0) = 0, by sign case of the initial values.

    (i)   0 < x10 < x20:  x20 E_lo - x10 E_up  <=  .  <=  x20 E_up - x10 E_lo
    (ii)  x10 < 0 < x20:  (x20 - x10) E_lo     <=  .  <=  (x20 - x10) E_up
    (iii) x10 < x20 < 0:  x20 E_up - x10 E_lo  <=  .  <=  x20 E_lo - x10 E_up

    with E_lo = E_alpha(a_* t^alpha), E_up = E_alpha(a^* t^alpha).  Negative
    lower bounds from (i)/(iii) are clamped at 0.
    """
    _require_kind(coeff_env, ("nonlinear-sampled", "closed-form", "linear"), "separation_bounds")
    _check_alpha(alpha)
    if not x10 < x20:
        raise InvalidParameterError(f"need x10 < x20, got {x10!r} >= {x20!r}")
    if x10 == 0 or x20 == 0:
        raise BoundaryZeroError("initial values on the boundary x = 0 are not covered")
    t = coeff_env.times
    e_lo, e_up = _ml_pair(alpha, coeff_env.lower, coeff_env.upper, t)
    if x10 > 0:
        lower = _difference(x20 * e_lo, x10 * e_up)
        upper = _difference(x20 * e_up, x10 * e_lo)
    elif x20 < 0:
        lower = _difference(x20 * e_up, x10 * e_lo)
        upper = _difference(x20 * e_lo, x10 * e_up)
    else:
        lower = (x20 - x10) * e_lo
        upper = (x20 - x10) * e_up
    lower = np.where(np.isnan(lower), 0.0, np.maximum(lower, 0.0))
    upper = np.where(np.isnan(upper), np.inf, upper)
    return BoundEnvelope(t, lower, upper, "separation-cases")


def sandwich_mask(bounds: BoundEnvelope, values, rtol=1e-6, atol=1e-8) -> np.ndarray:
    """True where lower*(1 - rtol) - atol <= values <= upper*(1 + rtol) + atol."""
    values = np.asarray(values, dtype=float)
    lo = bounds.lower * (1 - rtol) - atol
    with np.errstate(invalid="ignore"):
        hi = bounds.upper * (1 + rtol) + atol
    return (values >= np.minimum(lo, bounds.lower)) & (values <= np.maximum(hi, bounds.upper))


class Verdict(str, enum.Enum):
    STABLE = "asymptotically-stable-by-criterion"
    INCONCLUSIVE = "criterion-inconclusive"


@dataclasses.dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    sup_coefficient: float
    t_probe: float

    @property
    def stable(self) -> bool:
        return self.verdict is Verdict.STABLE


def stability_verdict(coeff_env: CoeffEnvelope, t_probe: float, global_sup: bool = False) -> StabilityVerdict:
    """Sufficient criterion for asymptotic stability: sup of the upper envelope < 0.

    The envelope only covers [0, t_probe]; ``global_sup`` asserts that its
    supremum there is the supremum over [0, inf).  Without it, or when the
    supremum is >= 0, the verdict is inconclusive.  The criterion never
    proves instability.
    """
    times = coeff_env.times
    if t_probe < times[0] or t_probe > times[-1] * (1 + 1e-12):
        raise InvalidParameterError(f"t_probe={t_probe!r} is outside the envelope grid")
    idx = int(np.searchsorted(times, t_probe * (1 + 1e-12), side="right")) - 1
    sup = float(coeff_env.upper[idx])
    stable = global_sup and sup < 0
    return StabilityVerdict(Verdict.STABLE if stable else Verdict.INCONCLUSIVE, sup, float(times[idx]))
