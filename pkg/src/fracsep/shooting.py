"""Shooting method for terminal value problems D^alpha x = f(t, x), x(T) = x*.

The terminal value x(T) is strictly increasing in x(0), so x(0) can be
found by bisection.  When a coefficient envelope is available the
separation bounds turn a terminal residual r into an interval of initial
shifts, and the next guess is taken from that interval instead of from the
middle of the bracket.  For constant coefficients the interval is a single
point and the iteration finishes after one correction.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

from .envelope import CoeffEnvelope
from .errors import (
    BracketExpansionError,
    DegenerateBracketError,
    InvalidParameterError,
    MaxIterExceededError,
)
from .mittag_leffler import ml
from .solvers import FracIVP, solve_pi_trapezoidal

__all__ = [
    "ShootingReport",
    "TVProblem",
    "bound_guided_bracket",
    "solve_tvp",
    "terminal_map",
]

MAX_DOUBLINGS = 60


@dataclasses.dataclass(frozen=True)
class TVProblem:
    alpha: float
    rhs: Callable[[float, float], float]
    t_end: float
    x_target: float
    tol: float = 1e-8
    max_iter: int = 100

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidParameterError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise InvalidParameterError(f"t_end must be positive, got {self.t_end!r}")
        if not math.isfinite(self.x_target):
            raise InvalidParameterError("x_target must be finite")
        if not self.tol > 0:
            raise InvalidParameterError(f"tol must be positive, got {self.tol!r}")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")


@dataclasses.dataclass
class ShootingReport:
    x0_found: float
    terminal_achieved: float
    iterations: int
    bracket_history: list = dataclasses.field(default_factory=list)

    def as_dict(self):
        return {
            "x0": self.x0_found,
            "terminal": self.terminal_achieved,
            "iterations": self.iterations,
            "brackets": [list(b) for b in self.bracket_history],
        }


def terminal_map(alpha, rhs, t_end, x0, h) -> float:
    """x(T) of the trapezoidal solution started from x0."""
    return solve_pi_trapezoidal(FracIVP(alpha, rhs, x0, t_end), h).final


def bound_guided_bracket(residual, alpha, coeff_env_at_T, t_end, cap=None):
    """Interval of initial shifts consistent with a terminal residual.

    With a_low <= a_up the coefficient envelope at T, a shift d of the
    initial value moves x(T) by between d*E(a_low T^a) and d*E(a_up T^a),
    so the shift producing ``residual`` lies between residual/E(a_up T^a)
    and residual/E(a_low T^a).  The pair is returned sorted.

    If E(a_low T^a) underflows to 0 the far end is unbounded: this raises
    :class:`DegenerateBracketError` unless ``cap`` (a bound on |shift|) is given.
    """
    a_low, a_up = (float(v) for v in coeff_env_at_T)
    if residual == 0 or not math.isfinite(residual):
        raise InvalidParameterError("residual must be finite and nonzero")
    if not a_low <= a_up:
        raise InvalidParameterError(f"need a_low <= a_up, got {a_low!r} > {a_up!r}")
    scale = t_end**alpha
    e_up = ml(alpha, a_up * scale)
    e_low = ml(alpha, a_low * scale)
    near = 0.0 if math.isinf(e_up) else residual / e_up
    if e_low == 0.0:
        if cap is None:
            raise DegenerateBracketError(
                f"E_alpha(a_low * T**alpha) underflows for a_low={a_low!r}; no finite bracket"
            )
        far = math.copysign(cap, residual)
    else:
        far = residual / e_low
        if cap is not None and abs(far) > cap:
            far = math.copysign(cap, residual)
    return (near, far) if near <= far else (far, near)


class _Bracket:
    """Sign-verified bracket: terminal(lo) < target < terminal(hi)."""

    def __init__(self):
        self.lo = -math.inf
        self.hi = math.inf
        self.history = []

    @property
    def closed(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self):
        return self.hi - self.lo

    def update(self, x0, residual):
        before = self.width
        if residual > 0:
            self.lo = max(self.lo, x0)
        else:
            self.hi = min(self.hi, x0)
        if self.closed and (not self.history or self.width < before):
            self.history.append((self.lo, self.hi))

    def midpoint(self):
        return 0.5 * (self.lo + self.hi)


def solve_tvp(problem: TVProblem, h: float, coeff_env: Optional[CoeffEnvelope] = None) -> ShootingReport:
    """Find x(0) with |x(T) - x_target| <= tol.

    The first guess is x_target.  Without an envelope the bracket is grown
    from there by doubling a radius that starts at max(1, |x_target|), and
    then bisected.  With an envelope each new guess is the midpoint of the
    bound-guided interval (clipped to the current bracket), falling back to
    bisection whenever a step fails to halve the bracket.
    """
    p = problem
    fmap = lambda x0: terminal_map(p.alpha, p.rhs, p.t_end, x0, h)  # noqa: E731
    env_at_T = coeff_env.at_end() if coeff_env is not None else None

    bracket = _Bracket()
    iterations = 0

    def evaluate(x0):
        nonlocal iterations
        if iterations >= p.max_iter:
            raise MaxIterExceededError(
                f"no x0 with |x(T) - target| <= {p.tol!r} after {p.max_iter} terminal solves"
            )
        iterations += 1
        term = fmap(x0)
        return term, p.x_target - term

    x0 = p.x_target
    term, res = evaluate(x0)
    if abs(res) <= p.tol:
        return ShootingReport(x0, term, iterations, bracket.history)
    bracket.update(x0, res)

    if env_at_T is None:
        radius = max(1.0, abs(p.x_target))
        direction = 1.0 if res > 0 else -1.0
        for _ in range(MAX_DOUBLINGS):
            x0 = p.x_target + direction * radius
            term, res = evaluate(x0)
            if abs(res) <= p.tol:
                return ShootingReport(x0, term, iterations, bracket.history)
            bracket.update(x0, res)
            if bracket.closed:
                break
            radius *= 2.0
        else:
            raise BracketExpansionError(
                f"no sign change within radius {radius!r} of x_target={p.x_target!r}"
            )

    width_before = bracket.width
    use_bisection = False
    while True:
        if env_at_T is not None and not use_bisection:
            cap = 1e3 * max(1.0, abs(x0), bracket.width if bracket.closed else 0.0)
            dlo, dhi = bound_guided_bracket(res, p.alpha, env_at_T, p.t_end, cap=cap)
            lo, hi = max(bracket.lo, x0 + dlo), min(bracket.hi, x0 + dhi)
            if lo <= hi:
                candidate = 0.5 * (lo + hi)
            elif bracket.closed:
                candidate = bracket.midpoint()
            else:
                candidate = x0 + 0.5 * (dlo + dhi)
        else:
            candidate = bracket.midpoint()
        if candidate == x0 or (bracket.closed and not bracket.lo < candidate < bracket.hi):
            candidate = bracket.midpoint() if bracket.closed else x0 + res
        x0 = candidate
        term, res = evaluate(x0)
        if abs(res) <= p.tol:
            return ShootingReport(x0, term, iterations, bracket.history)
        bracket.update(x0, res)
        if bracket.closed:
            # guided steps must at least match bisection, or we bisect next time
            use_bisection = bracket.width > 0.5 * width_before
            width_before = bracket.width
