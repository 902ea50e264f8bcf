"""Separation bounds for solutions of scalar Caputo fractional differential equations."""

from .bounds import (
    BoundEnvelope,
    StabilityVerdict,
    Verdict,
    classic_bounds,
    general_separation_bounds,
    linear_bounds,
    nonlinear_zero_bounds,
    sandwich_mask,
    separation_bounds,
    stability_verdict,
)
from .envelope import (
    CoeffEnvelope,
    SamplingBox,
    closed_form_envelope,
    linear_coeff_envelope,
    lipschitz_from_envelope,
    nonlinear_coeff_envelope,
    running_sup_lipschitz,
    shifted_coeff_envelope,
)
from .errors import *  # noqa: F401,F403
from .mittag_leffler import ml, ml2, ml_array, ml_asymptotic, ml_series_oracle, rgamma, switch_point
from .shooting import ShootingReport, TVProblem, bound_guided_bracket, solve_tvp, terminal_map
from .solvers import (
    FracIVP,
    Trajectory,
    make_grid,
    solve_abm,
    solve_linear_analytic,
    solve_pi_trapezoidal,
)

__version__ = "0.1.0"
