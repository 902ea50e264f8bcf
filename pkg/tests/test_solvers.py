import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import a_ex1
from fracsep import (
    BlowUpError,
    FracIVP,
    GridAdjustmentWarning,
    InvalidParameterError,
    NoConvergenceError,
    StepSizeWarning,
    Trajectory,
    make_grid,
    ml,
    solve_abm,
    solve_linear_analytic,
    solve_pi_trapezoidal,
)
from fracsep.solvers import _second_difference_weights, _start_weights, starting_exponents


def linear(lam):
    return lambda t, x: lam * x


def test_zero_rhs_keeps_initial_value():
    traj = solve_pi_trapezoidal(FracIVP(1.0, lambda t, x: 0.0, 3.0, 1.0), 0.1)
    assert len(traj) == 11
    assert np.all(traj.values == 3.0)


def test_pi_linear_terminal_value():
    traj = solve_pi_trapezoidal(FracIVP(0.65, linear(-1.0), 1.0, 1.0), 1e-3)
    assert abs(traj.final - ml(0.65, -1.0)) <= 1e-4


def test_pi_matches_abm_on_example_problem():
    ivp = FracIVP(0.65, lambda t, x: a_ex1(t) * x, 1.0, 6.0)
    abm = solve_abm(ivp, 1e-3)
    plain = solve_pi_trapezoidal(ivp, 1e-3, starting_weights=False)
    assert np.max(np.abs(plain.values - abm.values)) <= 1e-5
    # the corrected start removes an O(h**(2 alpha)) error ABM still carries
    pi = solve_pi_trapezoidal(ivp, 1e-3)
    assert np.max(np.abs(pi.values - abm.values)) <= 1e-3


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.65, 0.8])
def test_starting_weights_integrate_powers_exactly(alpha):
    # f = t**sigma: x(t) = Gamma(sigma+1)/Gamma(sigma+1+alpha) t**(sigma+alpha)
    for sigma in starting_exponents(alpha):
        traj = solve_pi_trapezoidal(FracIVP(alpha, lambda t, x: t**sigma, 0.0, 1.0), 0.01)
        coef = math.gamma(sigma + 1.0) / math.gamma(sigma + 1.0 + alpha)
        assert np.max(np.abs(traj.values - coef * traj.times ** (sigma + alpha))) <= 1e-12


def test_starting_exponents():
    assert starting_exponents(1.0) == (0.0, 1.0)
    assert starting_exponents(0.5) == (0.0, 0.5, 1.0)
    assert starting_exponents(0.65) == (0.0, 0.65, 1.0, 1.3)


def test_starting_weights_reduce_linear_error():
    ivp = FracIVP(0.65, linear(-1.0), 1.0, 1.0)
    errs = {}
    for sw in (False, True):
        traj = solve_pi_trapezoidal(ivp, 1e-3, starting_weights=sw)
        errs[sw] = np.max(np.abs(traj.values - solve_linear_analytic(0.65, -1.0, 1.0, traj.times).values))
    assert errs[True] < 1e-7 < errs[False]


def test_abm_classical_limit():
    traj = solve_abm(FracIVP(1.0, linear(1.0), 1.0, 1.0), 1e-3)
    assert traj.final == pytest.approx(math.e, abs=1e-5)


@pytest.mark.parametrize("solver", [solve_pi_trapezoidal, solve_abm])
def test_classical_limit_whole_trajectory(solver):
    traj = solver(FracIVP(1.0, linear(-2.0), 1.5, 1.0), 1e-3)
    assert np.max(np.abs(traj.values - 1.5 * np.exp(-2.0 * traj.times))) <= 1e-6


def test_abm_linear_pointwise():
    traj = solve_abm(FracIVP(0.65, linear(-1.0), 1.0, 1.0), 1e-3)
    exact = solve_linear_analytic(0.65, -1.0, 1.0, traj.times)
    assert np.max(np.abs(traj.values - exact.values)) <= 1e-3


def test_cross_solver_difference_shrinks():
    ivp = FracIVP(0.65, lambda t, x: -x + 0.5 * np.sin(x) + np.cos(t), 0.3, 1.0)
    diffs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        diffs.append(np.max(np.abs(solve_pi_trapezoidal(ivp, h).values - solve_abm(ivp, h).values)))
    assert diffs[0] > diffs[1] > diffs[2]


@pytest.mark.parametrize("solver", [solve_pi_trapezoidal, solve_abm])
def test_error_decreases_under_halving(solver):
    errors = []
    for h in (4e-3, 2e-3, 1e-3):
        traj = solver(FracIVP(0.65, linear(-1.0), 1.0, 1.0), h)
        exact = solve_linear_analytic(0.65, -1.0, 1.0, traj.times)
        errors.append(np.max(np.abs(traj.values - exact.values)))
    assert errors[0] / errors[1] >= 1.5
    assert errors[1] / errors[2] >= 1.5


def test_analytic_examples():
    traj = solve_linear_analytic(1.0, -1.0, 1.0, [0.0, 1.0])
    assert traj.values[0] == 1.0
    assert traj.values[1] == pytest.approx(math.exp(-1.0), rel=1e-15)
    grid = make_grid(6.0, 0.01)
    assert np.all(solve_linear_analytic(0.65, 0.0, 5.0, grid).values == 5.0)
    decay = solve_linear_analytic(0.65, -1.0, 1.0, grid).values
    assert np.all(decay > 0) and np.all(np.diff(decay) < 0)


def test_analytic_blow_up():
    with pytest.raises(BlowUpError):
        solve_linear_analytic(0.5, 10.0, 1.0, make_grid(10.0, 0.5))


def test_weights_against_multiprecision():
    alpha, n = 0.65, 200
    c = _second_difference_weights(alpha, n)
    w0 = _start_weights(alpha, n)
    with mpmath.workdps(40):
        p = mpmath.mpf(alpha) + 1
        for m in (1, 2, 7, 50, 199):
            exact = (m + 1) ** p - 2 * mpmath.mpf(m) ** p + (m - 1) ** p
            assert c[m] == pytest.approx(float(exact), rel=1e-13)
        for k in (1, 2, 9, 200):
            exact = (k - 1) ** p - mpmath.mpf(k) ** (p - 1) * (k - p)
            assert w0[k] == pytest.approx(float(exact), rel=1e-13)


def test_weights_integrate_constants_exactly():
    # f = 1: x_n = x0 + t_n**alpha / Gamma(alpha + 1) is reproduced exactly
    for alpha in (0.3, 0.65, 1.0):
        traj = solve_pi_trapezoidal(FracIVP(alpha, lambda t, x: 1.0, 0.0, 2.0), 0.01)
        exact = traj.times**alpha / math.gamma(alpha + 1.0)
        assert np.max(np.abs(traj.values - exact)) <= 1e-12


def test_grid_and_adjustment_warning():
    grid = make_grid(1.0, 0.1)
    assert grid.size == 11 and grid[-1] == pytest.approx(1.0)
    with pytest.warns(GridAdjustmentWarning):
        make_grid(1.0, 0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        make_grid(6.0, 1e-3)


def test_invalid_inputs():
    with pytest.raises(InvalidParameterError):
        FracIVP(1.5, linear(1.0), 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        FracIVP(0.5, linear(1.0), 1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        make_grid(1.0, -0.1)
    with pytest.raises(InvalidParameterError):
        make_grid(1.0, 2.0)
    with pytest.raises(InvalidParameterError):
        Trajectory(0.1, [0.0, 0.1, 0.3], [1.0, 1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        Trajectory(0.1, [0.0, 0.1], [1.0, math.nan])


def test_step_size_advisory():
    with pytest.warns(StepSizeWarning):
        solve_pi_trapezoidal(FracIVP(0.5, linear(-100.0), 1.0, 1.0, lipschitz=100.0), 0.1)


def test_blow_up_detected():
    with np.errstate(over="ignore"), pytest.raises(BlowUpError):
        solve_pi_trapezoidal(FracIVP(1.0, lambda t, x: x * x, 1.0, 2.0), 1e-2)


def test_no_convergence_reported():
    # x = base + k*f(x) with f jumping over the fixed point has no solution
    with pytest.raises(NoConvergenceError):
        solve_pi_trapezoidal(FracIVP(0.5, lambda t, x: -np.sign(x - 0.5) * 1e3, 0.4, 1.0), 0.1)


def random_lipschitz_rhs(rng):
    """a(t)*x plus a sinusoidal perturbation in x; Lipschitz constant <= 2.5."""
    c0, c1 = rng.uniform(-1, 1, 2)
    w = rng.uniform(0.5, 5)
    eps, k = rng.uniform(0, 1), rng.uniform(0.5, 1.5)
    phase = rng.uniform(0, 2 * np.pi)
    return lambda t, x: (c0 + c1 * np.sin(w * t)) * x + eps * np.sin(k * x + phase) + np.cos(t)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.3, 1.0))
def test_ordering_property(seed, alpha):
    rng = np.random.default_rng(seed)
    f = random_lipschitz_rhs(rng)
    x10, x20 = np.sort(rng.uniform(-2, 2, 2))
    if x10 == x20:
        return
    x1 = solve_pi_trapezoidal(FracIVP(alpha, f, x10, 2.0), 1e-2)
    x2 = solve_pi_trapezoidal(FracIVP(alpha, f, x20, 2.0), 1e-2)
    assert np.all(x1.values < x2.values)


def test_example_problem_step_insensitive():
    # the default h = 1e-3 against a halved step on the shared grid points
    ivp = FracIVP(0.65, lambda t, x: a_ex1(t) * x, 1.0, 6.0)
    coarse = solve_pi_trapezoidal(ivp, 1e-3)
    fine = solve_pi_trapezoidal(ivp, 5e-4)
    assert np.allclose(coarse.times, fine.times[::2], rtol=0, atol=1e-12)
    assert np.max(np.abs(coarse.values - fine.values[::2])) <= 1e-6
