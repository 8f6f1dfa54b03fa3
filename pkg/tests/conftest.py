import numpy as np
import pytest
from hypothesis import strategies as st

from shiftspan.pwfunc import Grid, PiecewisePoly, build_indicator, build_poly_bump, convolve

TWO_PI = 2 * np.pi


def indicator(lo, hi, n=8):
    return build_indicator(lo, hi, Grid(lo, hi, n))


@pytest.fixture(scope="session")
def chi():
    return indicator(0.0, 1.0)


@pytest.fixture(scope="session")
def tri(chi):
    return convolve(chi, chi)


@pytest.fixture(scope="session")
def bump():
    return build_poly_bump(0.0, 1.0, 2, Grid(-1.0, 1.0, 16))


def chi_hat(z):
    """Closed-form transform of the unit indicator."""
    z = np.asarray(z, complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = (np.exp(1j * z) - 1) / (1j * z)
    return np.where(z == 0, 1.0, v)


def random_pp(rng, n_max=64, deg_max=3, complex_=False, steps=(0.125, 0.25, 0.5)):
    """Random piecewise polynomial with nonzero end cells, so its support is its grid."""
    h = float(rng.choice(steps))
    n = int(rng.integers(1, n_max + 1))
    a = h * int(rng.integers(-16, 17))
    d = int(rng.integers(0, deg_max + 1))
    c = rng.standard_normal((n, d + 1))
    if complex_:
        c = c + 1j * rng.standard_normal((n, d + 1))
    c[0, 0] += 3.0 * np.sign(c[0, 0] or 1.0)
    c[-1, 0] += 3.0 * np.sign(c[-1, 0] or 1.0)
    return PiecewisePoly(Grid(a, a + n * h, n), c)


@st.composite
def pp_strategy(draw, n_max=16, deg_max=3, complex_=False):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_pp(np.random.default_rng(seed), n_max, deg_max, complex_)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}" + (f" | {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
