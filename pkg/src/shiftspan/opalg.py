"""Computable fragment of the operational calculus on compactly supported functions.

Two one-sided kernels are handled without ever representing their unbounded
support: convolution with ``e_alpha(t) = exp(alpha*t) [t >= 0]`` and its
``k``-fold iterate ``t^(k-1)/(k-1)! exp(-i z0 t)``, which divides the
transform by ``(z - z0)^k`` up to the constant ``(-i)^k``.  Both are
running integrals ``g(t) = exp(alpha t) int_{-inf}^t exp(-alpha s) f(s) ds``
evaluated cell by cell.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import PreconditionError
from .fourier import ZERO_TOL, Rect, deriv_tol, exp_moments, ft_derivs, zero_search
from .parallel import pmap
from .pwfunc import (
    DEGREE_CAP,
    Grid,
    PiecewisePoly,
    _horner,
    conv_power,
    convolve,
    l1_norm,
    refine,
    support_endpoints,
)

MAX_BETA = 0.5


def _running_exp_integral(f, alpha, n_extra=0, degree=DEGREE_CAP):
    """``f * e_alpha`` on ``f``'s grid extended by ``n_extra`` cells to the right.

    In cell ``j`` with ``beta = alpha*h`` the exact result is
    ``exp(beta u) B_j + h sum_m c_m int_0^u v^m exp(beta (u - v)) dv``,
    whose Taylor coefficients are ``(B_j beta^d + h sum_m c_m m! beta^(d-1-m)) / d!``.
    The grid is refined first so that ``|beta| <= 1/2``; the series is cut at
    ``degree`` and the cut is checked at three points per cell against the
    closed form.

    Returns ``(g, end_value, interp_err)`` where ``end_value`` is the value
    of the untruncated convolution at the right end of the extended grid.
    """
    r = max(1, int(np.ceil(abs(alpha) * f.h / MAX_BETA)))
    f = refine(f, r)
    h = f.h
    beta = complex(alpha * h)
    n = f.grid.n + n_extra
    C = np.zeros((n, f.coeffs.shape[1]), complex)
    C[: f.grid.n] = f.coeffs
    p = C.shape[1] - 1
    # cell increments: h * sum_m c_m int_0^1 v^m exp(beta (1 - v)) dv
    M1 = exp_moments(1j * beta, p)
    inc = h * np.exp(beta) * (C @ M1)
    eb = np.exp(beta)
    B = np.empty(n + 1, complex)
    B[0] = 0.0
    for j in range(n):
        B[j + 1] = eb * B[j] + inc[j]
    d = np.arange(degree + 1)
    fact_d = np.array([factorial(i) for i in d], float)
    out = B[:n, None] * beta ** d[None, :]
    fact_m = np.array([factorial(m) for m in range(p + 1)], float)
    for m in range(p + 1):
        dd = d[d >= m + 1]
        out[:, dd] += h * C[:, m : m + 1] * fact_m[m] * beta ** (dd - 1 - m)[None, :]
    out /= fact_d
    # closed form at check points
    uc = np.array([0.0, 0.6180339887498949, 1.0])
    Mu = exp_moments(1j * beta * uc, p)  # (3, p+1)
    upow = uc[:, None] ** (np.arange(p + 1) + 1)[None, :]
    exact = np.exp(beta * uc)[None, :] * (B[:n, None] + h * (C @ (Mu * upow).T))
    approx = _horner(out[:, None, :], uc[None, :])
    cell_err = np.max(np.abs(exact - approx), axis=1)
    grid = Grid(f.grid.a, f.grid.a + n * h, n)
    return PiecewisePoly(grid, out), complex(B[n]), float(np.sum(cell_err) * h)


def _exp_l1(re_alpha, width):
    """``int_0^width |exp(alpha s)| ds``."""
    if abs(re_alpha * width) < 1e-12:
        return width
    return float(np.expm1(re_alpha * width) / re_alpha)


def convolve_e_alpha(f, alpha, horizon):
    """``f * e_alpha`` truncated to ``[grid.a, horizon]``.

    ``e_alpha(t) = exp(alpha t)`` for ``t >= 0`` and 0 otherwise, so the
    exact convolution generally has unbounded support; the truncation point
    ``horizon`` (rounded up to the grid) is explicit.  The recorded error
    covers re-expansion and any error carried by ``f``.
    """
    a, h = f.grid.a, f.h
    if horizon < a:
        raise PreconditionError("horizon lies left of the function's grid")
    n_total = max(1, int(np.ceil((horizon - a) / h - 1e-9)))
    n_extra = max(0, n_total - f.grid.n)
    g, _, ierr = _running_exp_integral(f, complex(alpha), n_extra)
    keep = int(np.ceil((horizon - a) / g.h - 1e-9))
    keep = max(1, min(keep, g.grid.n))
    grid = Grid(g.grid.a, g.grid.a + keep * g.h, keep)
    carried = f.error * _exp_l1(complex(alpha).real, horizon - a) if f.error else 0.0
    return PiecewisePoly(grid, g.coeffs[:keep], ierr + carried)


@dataclass
class RemovalInfo:
    """Diagnostics of :func:`remove_zero`."""

    tail_mass: float
    interp_error: float
    tail_tol: float


def remove_zero(f, z0, k, zero_tol=ZERO_TOL, tail_tol=None, return_info=False):
    """Divide the transform of ``f`` by ``(z - z0)^k`` without leaving ``supp f``.

    Requires ``F^(j)(z0) = 0`` for ``j < k``.  Each of the ``k`` passes is
    ``psi <- -i exp(-i z0 t) int_{-inf}^t exp(i z0 s) psi(s) ds``; for a true
    zero the running integral ends at (numerically) zero, so ``psi`` vanishes
    to the right of the support.  The mass that would leak past the support
    (measured over one support width) must stay below ``tail_tol``
    (default ``1e-8 * ||f||_1``).

    Raises:
        PreconditionError: ``z0`` is not a zero of order ``k``, or the tail
            exceeds ``tail_tol``.
    """
    z0 = complex(z0)
    k = int(k)
    if k < 1:
        raise PreconditionError("k must be >= 1")
    D = ft_derivs(f, z0, k - 1)
    for j in range(k):
        if abs(D[j]) > deriv_tol(f, j, zero_tol):
            raise PreconditionError(
                f"not a zero of required order: |F^({j})({z0:.6g})| = {abs(D[j]):.3g} (k = {k})"
            )
    norm = l1_norm(f)
    if tail_tol is None:
        tail_tol = 1e-8 * norm
    alpha = -1j * z0
    width = f.grid.b - f.grid.a
    psi = f
    tail = 0.0
    ierr = 0.0
    for _ in range(k):
        g, end, e = _running_exp_integral(psi, alpha)
        tail = max(tail, abs(end) * _exp_l1(alpha.real, width))
        carried = psi.error * _exp_l1(alpha.real, width) if psi.error else 0.0
        ierr += e
        psi = PiecewisePoly(g.grid, g.coeffs * (-1j), e + carried)
    if tail > tail_tol:
        raise PreconditionError(
            f"remove_zero tail mass {tail:.3g} exceeds {tail_tol:.3g}; refine the grid or "
            "locate the zero more accurately"
        )
    if return_info:
        return psi, RemovalInfo(tail, ierr, tail_tol)
    return psi


# ----------------------------------------------------------------------------
# quotients and supports


@dataclass(frozen=True)
class OperatorQuotient:
    """A formal quotient ``num / den`` of two functions (``den`` nonzero).

    Quotients are never simplified; they only carry the pair into support
    computations and numeric equality checks.
    """

    num: PiecewisePoly
    den: PiecewisePoly

    def __post_init__(self):
        if self.den.is_zero():
            raise PreconditionError("operator denominator is the zero function")

    def equals(self, other, rtol=1e-10):
        """Numeric check of ``num1 * den2 == num2 * den1``."""
        lhs = convolve(self.num, other.den)
        rhs = convolve(other.num, self.den)
        scale_ = max(l1_norm(lhs), l1_norm(rhs), 1e-300)
        return l1_norm(lhs - rhs) <= rtol * scale_


def op_support(xi, tol=None):
    """``(Lambda(num) - Lambda(den), Gamma(num) - Gamma(den))``."""
    if xi.den.is_zero():
        raise PreconditionError("operator denominator is the zero function")
    sn = support_endpoints(xi.num, tol)
    sd = support_endpoints(xi.den, tol)
    if sd.empty:
        raise PreconditionError("operator denominator has empty support")
    if sn.empty:
        raise PreconditionError("zero operator has no support endpoints")
    return sn.lam - sd.lam, sn.gamma - sd.gamma


@dataclass
class TitchmarshReport:
    dev_lambda: float
    dev_gamma: float
    h: float

    @property
    def passed(self):
        return self.dev_lambda <= self.h * (1 + 1e-9) and self.dev_gamma <= self.h * (1 + 1e-9)

    def to_dict(self):
        return {"dev_lambda": self.dev_lambda, "dev_gamma": self.dev_gamma, "h": self.h, "passed": self.passed}


def titchmarsh_report(f, g, tol=None):
    """Deviation of the convolution's support endpoints from the endpoint sums."""
    fg = convolve(f, g)
    sf, sg, sfg = support_endpoints(f, tol), support_endpoints(g, tol), support_endpoints(fg, tol)
    if sf.empty or sg.empty:
        raise PreconditionError("support endpoints of the zero function are undefined")
    return TitchmarshReport(
        abs(sfg.lam - sf.lam - sg.lam), abs(sfg.gamma - sf.gamma - sg.gamma), fg.h
    )


# ----------------------------------------------------------------------------
# generator construction with one zero removed per member


@dataclass
class ExampleConstruction:
    base_atlas: object
    removed: list  # (z_k, n_k), k = 1..K
    generators: list


def ordered_zeros(atlas):
    """Zeros of an atlas in the fixed order ``z_1, z_2, ...`` (ascending ``|z|``)."""
    return sorted(atlas.zeros, key=lambda r: (abs(r.z), r.z.real, r.z.imag))


def example_construction(phi, K, rect, zero_tol=ZERO_TOL):
    """Build ``phi_k = (phi with z_k removed to order n_k)^(*k)`` for ``k = 1..K``.

    ``z_1, z_2, ...`` are the zeros of ``phi`` in ``rect`` ordered by
    modulus.  The transform of ``phi_k`` is a constant times
    ``(F(z) / (z - z_k)^(n_k))^k``: it misses ``z_k`` and keeps every other
    zero with multiplicity multiplied by ``k``.
    """
    atlas = zero_search(phi, Rect.of(rect), zero_tol)
    zs = ordered_zeros(atlas)
    if len(zs) < K:
        raise PreconditionError(f"only {len(zs)} zeros in rect, need K = {K}")
    removed = [(zs[k].z, zs[k].mult) for k in range(K)]

    def build(k):
        z, n = removed[k - 1]
        return conv_power(remove_zero(phi, z, n, zero_tol), k)

    gens = pmap(build, range(1, K + 1))
    return ExampleConstruction(atlas, removed, gens)


def example_generators(phi, K, rect, zero_tol=ZERO_TOL):
    """The generator list ``phi_1, ..., phi_K`` of :func:`example_construction`."""
    return example_construction(phi, K, rect, zero_tol).generators
