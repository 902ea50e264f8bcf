"""Uniform-grid solvers for scalar Caputo initial value problems.

The problem D^alpha x = f(t, x), x(0) = x0 is solved in its Volterra form

    x(t) = x0 + 1/Gamma(alpha) * int_0^t (t - s)**(alpha - 1) f(s, x(s)) ds

by product integration: f is replaced by its piecewise linear interpolant
on the grid (implicit trapezoidal rule), or by the piecewise constant one
for the predictor of the Adams-Bashforth-Moulton scheme.  History sums are
evaluated directly, O(N**2) work in total.

Solutions of these equations behave like x0 + c*t**alpha near t = 0, which
the plain trapezoidal rule integrates with an O(h**(2*alpha)) error in the
first steps.  :func:`solve_pi_trapezoidal` therefore adds Lubich-type
starting weights that make the quadrature exact for t**alpha and
t**(2*alpha) as well as for 1 and t.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .errors import (
    BlowUpError,
    GridAdjustmentWarning,
    InvalidParameterError,
    NoConvergenceError,
    StepSizeWarning,
)
from .mittag_leffler import ml_array

__all__ = [
    "FracIVP",
    "Trajectory",
    "make_grid",
    "solve_abm",
    "solve_linear_analytic",
    "solve_pi_trapezoidal",
    "starting_exponents",
]

BLOW_UP = 1e300
MAX_STEPS = 10_000_000
NEWTON_TOL = 1e-12
NEWTON_STEPS = 25
TOTAL_STEPS = 50


@dataclasses.dataclass(frozen=True)
class FracIVP:
    """D^alpha x(t) = rhs(t, x(t)) on [0, t_end], x(0) = x0.

    ``lipschitz`` is an optional bound for the Lipschitz constant of ``rhs``
    in x on [0, t_end]; it is only used for the step-size advisory.
    """

    alpha: float
    rhs: Callable[[float, float], float]
    x0: float
    t_end: float
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidParameterError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise InvalidParameterError(f"t_end must be positive, got {self.t_end!r}")
        if not math.isfinite(self.x0):
            raise InvalidParameterError("x0 must be finite")


@dataclasses.dataclass(frozen=True)
class Trajectory:
    h: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise InvalidParameterError("times and values must be 1-d arrays of equal length")
        if not self.h > 0:
            raise InvalidParameterError("step size must be positive")
        if times.size > 1:
            steps = np.diff(times)
            if np.any(steps <= 0) or np.max(np.abs(steps - self.h)) > 1e-9 * max(1.0, times[-1]):
                raise InvalidParameterError("times must form a uniform increasing grid with spacing h")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("trajectory values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def __len__(self):
        return self.times.size


def make_grid(t_end: float, h: float) -> np.ndarray:
    """Grid n*h, n = 0..N, with N*h the multiple of h nearest to ``t_end``."""
    if not (h > 0 and math.isfinite(h)):
        raise InvalidParameterError(f"step size must be positive, got {h!r}")
    n = int(round(t_end / h))
    if n < 1:
        raise InvalidParameterError(f"step {h!r} is larger than the horizon {t_end!r}")
    if n > MAX_STEPS:
        raise InvalidParameterError(f"{n} steps exceed the limit of {MAX_STEPS}")
    if abs(n * h - t_end) > 1e-9 * t_end:
        warnings.warn(
            f"horizon {t_end!r} is not a multiple of h={h!r}; using {n * h!r}",
            GridAdjustmentWarning,
            stacklevel=3,
        )
    return h * np.arange(n + 1, dtype=float)


def _second_difference_weights(alpha, n):
    """c[m] = (m+1)**p - 2*m**p + (m-1)**p with p = alpha + 1, for m = 1..n-1.

    Written through expm1/log1p: the direct formula loses ~log10(m**2) digits.
    """
    p = alpha + 1.0
    c = np.zeros(max(n, 1))
    if n > 1:
        m = np.arange(1, n, dtype=float)
        with np.errstate(divide="ignore"):
            c[1:] = m**p * (np.expm1(p * np.log1p(1.0 / m)) + np.expm1(p * np.log1p(-1.0 / m)))
    return c


def _start_weights(alpha, n):
    """w0[k] = (k-1)**p - k**alpha * (k - alpha - 1) for k = 1..n (p = alpha + 1)."""
    p = alpha + 1.0
    w0 = np.zeros(n + 1)
    k = np.arange(1, n + 1, dtype=float)
    with np.errstate(divide="ignore"):
        w0[1:] = k**p * (np.expm1(p * np.log1p(-1.0 / k)) + p / k)
    return w0


def starting_exponents(alpha):
    """Exponents the corrected rule integrates exactly: 0, 1 and the
    non-integer values of alpha, 2*alpha below 2."""
    extra = {round(k * alpha, 14) for k in (1, 2) if k * alpha < 2.0}
    return tuple(sorted({0.0, 1.0} | {e for e in extra if e != round(e)}))


def _starting_weights(alpha, n_steps, c, w0, sigmas):
    """Correction weights W[n, j], j = 0..s-1, in units of h**alpha/Gamma(alpha+2).

    For each n the corrected rule is exact for t**sigma at t_n, sigma in ``sigmas``.
    """
    s = len(sigmas)
    n = np.arange(n_steps + 1, dtype=float)
    err = np.zeros((n_steps + 1, s))
    for k, sig in enumerate(sigmas):
        if sig == round(sig):
            # the trapezoidal rule is already exact for 1 and t
            continue
        pw = n**sig
        quad = w0 * pw[0] + pw
        if n_steps > 1:
            quad[2:] += np.convolve(c[1:], pw[1:])[: n_steps - 1]
        exact = math.exp(math.lgamma(alpha + 2.0) + math.lgamma(sig + 1.0) - math.lgamma(sig + alpha + 1.0))
        err[:, k] = exact * n ** (sig + alpha) - quad
    err[0] = 0.0
    nodes = np.arange(s, dtype=float)
    V = nodes[None, :] ** np.array(sigmas)[:, None]  # 0**0 = 1
    return np.linalg.solve(V, err.T).T


def _advise_step(ivp, h):
    if ivp.lipschitz is None:
        return
    if h**ivp.alpha * ivp.lipschitz / math.gamma(ivp.alpha + 2.0) >= 1.0:
        warnings.warn(
            f"h**alpha * L / Gamma(alpha+2) >= 1 for h={h!r}; the corrector may not contract",
            StepSizeWarning,
            stacklevel=3,
        )


def _check_value(x, t):
    if not (math.isfinite(x) and abs(x) <= BLOW_UP):
        raise BlowUpError(f"solution left the representable range at t={t!r} (x={x!r})")


def _bracket_root(g, visited, guess):
    """A sign change of g, from the Newton iterates or by expanding around ``guess``."""
    pos = [(x, v) for x, v in visited if v > 0]
    neg = [(x, v) for x, v in visited if v < 0]
    if pos and neg:
        return min(((p[0], n[0]) for p in pos for n in neg), key=lambda b: abs(b[0] - b[1]))
    g0 = g(guess)
    if not math.isfinite(g0):
        return None
    step = abs(g0) + 1e-8 * max(1.0, abs(guess))
    for _ in range(60):
        for x in (guess - step, guess + step):
            gx = g(x)
            if math.isfinite(gx) and gx * g0 <= 0:
                return guess, x
        step *= 2.0
    return None


def _solve_implicit(f, t, base, k, guess):
    """Solve x = base + k*f(t, x).

    Newton with a central-difference slope; if that has not converged after
    NEWTON_STEPS steps, Brent's method on a sign change of the residual, and
    finally damped fixed-point iteration.
    """
    g = lambda x: x - base - k * float(f(t, x))  # noqa: E731
    visited = []
    x = guess
    for _ in range(NEWTON_STEPS):
        gx = g(x)
        visited.append((x, gx))
        d = 1e-7 * max(1.0, abs(x))
        slope = (float(f(t, x + d)) - float(f(t, x - d))) / (2.0 * d)
        dg = 1.0 - k * slope
        if dg == 0.0 or not math.isfinite(dg) or not math.isfinite(gx):
            break
        step = gx / dg
        x -= step
        if not math.isfinite(x):
            break
        if abs(step) <= NEWTON_TOL * max(1.0, abs(x)):
            return x
    bracket = _bracket_root(g, visited, guess)
    if bracket is not None:
        a, b = sorted(bracket)
        xtol = NEWTON_TOL * max(1.0, abs(a), abs(b))
        root = optimize.brentq(g, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
        # a discontinuous f can produce a sign change without a root
        if abs(g(root)) <= 1e-9 * max(1.0, abs(root)):
            return root
    x = guess
    for _ in range(TOTAL_STEPS - NEWTON_STEPS):
        new = 0.5 * x + 0.5 * (base + k * float(f(t, x)))
        if abs(new - x) <= NEWTON_TOL * max(1.0, abs(new)):
            return new
        x = new
    raise NoConvergenceError(f"corrector equation did not converge at t={t!r}")


def solve_pi_trapezoidal(ivp: FracIVP, h: float, starting_weights: bool = True) -> Trajectory:
    """Implicit product-integration trapezoidal method.

    x_n = x_0 + h**alpha * sum_{j=0..n} w_{n,j} f(t_j, x_j) with the
    weights of the piecewise linear interpolant; the implicit equation for
    x_n is solved to 1e-12.  With ``starting_weights`` (the default) the
    correction weights of :func:`starting_exponents` are added; the first
    s-1 steps then form one small nonlinear system.
    """
    times = make_grid(ivp.t_end, h)
    _advise_step(ivp, h)
    alpha, f = ivp.alpha, ivp.rhs
    n_steps = times.size - 1
    scale = h**alpha / math.gamma(alpha + 2.0)
    c = _second_difference_weights(alpha, n_steps)
    w0 = _start_weights(alpha, n_steps)

    sigmas = starting_exponents(alpha) if starting_weights else ()
    s = len(sigmas)
    if s <= 2 or n_steps < s:
        # only 1 and t: nothing to correct
        W, s = None, 0
    else:
        W = _starting_weights(alpha, n_steps, c, w0, sigmas)

    x = np.empty(n_steps + 1)
    fx = np.empty(n_steps + 1)
    x[0] = ivp.x0
    fx[0] = float(f(0.0, ivp.x0))

    def history(n):
        hist = w0[n] * fx[0]
        if n > 1:
            hist += np.dot(c[n - 1 : 0 : -1], fx[1:n])
        return hist

    first = 1
    if W is not None:
        _start_block(f, times, x, fx, s, scale, c, w0, W)
        first = s
    for n in range(first, n_steps + 1):
        t = times[n]
        hist = history(n)
        if W is not None:
            hist += np.dot(W[n], fx[:s])
        base = ivp.x0 + scale * hist
        guess = base + scale * fx[n - 1]
        x[n] = _solve_implicit(f, t, base, scale, guess)
        _check_value(x[n], t)
        fx[n] = float(f(t, x[n]))
    return Trajectory(h=h, times=times, values=x)


def _start_block(f, times, x, fx, s, scale, c, w0, W):
    """Steps 1..s-1, coupled through the starting weights."""
    m = s - 1
    x0 = x[0]

    def residual(y):
        fy = np.concatenate([[fx[0]], [float(f(times[j], y[j - 1])) for j in range(1, s)]])
        out = np.empty(m)
        for n in range(1, s):
            hist = w0[n] * fy[0] + np.dot(c[n - 1 : 0 : -1], fy[1:n]) + fy[n] + np.dot(W[n], fy)
            out[n - 1] = y[n - 1] - x0 - scale * hist
        return out

    # uncorrected steps as the initial guess
    guess = np.empty(m)
    fg = [fx[0]]
    for n in range(1, s):
        hist = w0[n] * fg[0] + np.dot(c[n - 1 : 0 : -1], fg[1:n])
        base = x0 + scale * hist
        guess[n - 1] = _solve_implicit(f, times[n], base, scale, base + scale * fg[-1])
        fg.append(float(f(times[n], guess[n - 1])))
    sol = optimize.root(residual, guess, method="hybr", options={"xtol": 1e-14})
    y = sol.x
    if not (sol.success or np.max(np.abs(residual(y))) <= NEWTON_TOL * max(1.0, np.max(np.abs(y)))):
        raise NoConvergenceError(f"starting steps did not converge: {sol.message}")
    for n in range(1, s):
        x[n] = y[n - 1]
        _check_value(x[n], times[n])
        fx[n] = float(f(times[n], x[n]))


def solve_abm(ivp: FracIVP, h: float) -> Trajectory:
    """Fractional Adams-Bashforth-Moulton predictor-corrector (one corrector pass).

    Predictor: product rectangle rule.  Corrector: the trapezoidal weights of
    :func:`solve_pi_trapezoidal` with f evaluated at the predicted value.
    No starting weights: the predictor's O(h**alpha) start-up error dominates.
    """
    times = make_grid(ivp.t_end, h)
    _advise_step(ivp, h)
    alpha, f = ivp.alpha, ivp.rhs
    n_steps = times.size - 1
    scale = h**alpha / math.gamma(alpha + 2.0)
    pscale = h**alpha / math.gamma(alpha + 1.0)
    c = _second_difference_weights(alpha, n_steps)
    w0 = _start_weights(alpha, n_steps)
    m = np.arange(n_steps + 1, dtype=float)
    # d[m] = m**alpha - (m-1)**alpha, m >= 1
    d = np.zeros(n_steps + 1)
    with np.errstate(divide="ignore"):
        d[1:] = m[1:] ** alpha * -np.expm1(alpha * np.log1p(-1.0 / m[1:]))

    x = np.empty(n_steps + 1)
    fx = np.empty(n_steps + 1)
    x[0] = ivp.x0
    fx[0] = float(f(0.0, ivp.x0))
    for n in range(1, n_steps + 1):
        t = times[n]
        pred = ivp.x0 + pscale * np.dot(d[n:0:-1], fx[:n])
        _check_value(pred, t)
        hist = w0[n] * fx[0]
        if n > 1:
            hist += np.dot(c[n - 1 : 0 : -1], fx[1:n])
        x[n] = ivp.x0 + scale * (hist + float(f(t, pred)))
        _check_value(x[n], t)
        fx[n] = float(f(t, x[n]))
    return Trajectory(h=h, times=times, values=x)


def solve_linear_analytic(alpha: float, lam: float, x0: float, times) -> Trajectory:
    """Exact solution x0 * E_alpha(lam * t**alpha) of D^alpha x = lam * x."""
    times = np.asarray(times, dtype=float)
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not math.isfinite(lam):
        raise InvalidParameterError("lambda must be finite")
    values = x0 * ml_array(alpha, lam * times**alpha)
    if not np.all(np.isfinite(values)):
        raise BlowUpError("E_alpha(lam * t**alpha) overflows on this grid")
    h = float(times[1] - times[0]) if times.size > 1 else 1.0
    return Trajectory(h=h, times=times, values=values)
