import math

import mpmath
import numpy as np
import pytest

from fracsep.solvers import make_grid


def a_ex1(t):
    return -0.5 * (1.0 + 4.0 * t + 3.0 * np.cos(4.0 * t))


# running extrema of a_ex1 on [0, 6] in closed form
A_LOWER_6 = -12.5 - 1.5 * math.cos(24.0)
A_SUP = 0.5 * (math.sqrt(8.0) - 1.0 - math.pi + math.asin(1.0 / 3.0))


def ml_mp(alpha, beta, z):
    """E_{alpha,beta}(z) from the power series in multiprecision.

    The working precision covers the cancellation on the negative axis,
    which is about exp(|z|**(1/alpha)).
    """
    r = abs(z) ** (1.0 / alpha) if z != 0 else 0.0
    dps = int(r / math.log(10) + 30)
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        total = mpmath.mpf(0)
        eps = mpmath.mpf(10) ** (-dps + 5)
        k = 0
        while True:
            term = z**k * mpmath.rgamma(a * k + b)
            total += term
            if k > r / alpha + 5 and abs(term) <= eps * abs(total):
                break
            k += 1
        return float(total)


@pytest.fixture
def grid6():
    return make_grid(6.0, 1e-3)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
