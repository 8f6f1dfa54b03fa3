"""Compactly supported complex functions as piecewise polynomials.

A :class:`PiecewisePoly` lives on a uniform :class:`Grid` ``[a, b]`` with ``n``
cells of width ``h``.  Cell ``j`` stores a polynomial in the local coordinate
``u = (t - a - j*h)/h`` with ascending monomial coefficients, and the function
vanishes outside ``[a, b)``.

The representation is closed under addition, grid-aligned translation,
reflection and convolution, all of which are computed exactly (up to
floating-point rounding).  Operations that cannot be exact (projection to a
lower degree, re-expansion of exponentials) record an L1 error bound in
``PiecewisePoly.error``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gcd

import numpy as np
from numpy.polynomial import Chebyshev, Legendre, Polynomial
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from scipy.signal import convolve2d

from .errors import GridError, PreconditionError

DEGREE_CAP = 16
GRID_RTOL = 1e-9
MAX_REFINE = 1 << 16


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[a, b]`` into ``n`` half-open cells."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if int(self.n) != self.n or self.n < 1:
            raise GridError(f"cell count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise GridError(f"grid needs finite a < b, got [{self.a}, {self.b}]")

    @classmethod
    def from_step(cls, a, b, h):
        """Grid on ``[a, b]`` with step ``h``; ``b - a`` must be a multiple of ``h``."""
        n = _as_index((b - a) / h, what=f"interval length {b - a}", unit=h)
        return cls(a, b, n)

    @property
    def h(self):
        return (self.b - self.a) / self.n

    def starts(self):
        """Left endpoints of the cells."""
        return self.a + self.h * np.arange(self.n)

    def index_of(self, x):
        """Index ``j`` with ``x == a + j*h`` (``j`` may fall outside ``0..n``)."""
        return _as_index((x - self.a) / self.h, what=f"point {x}", unit=self.h, origin=self.a)

    def same_as(self, other):
        return (
            self.n == other.n
            and abs(self.a - other.a) <= GRID_RTOL * self.h
            and abs(self.b - other.b) <= GRID_RTOL * self.h
        )


@dataclass(frozen=True)
class SupportInfo:
    """Numerical support endpoints ``lam`` and ``gamma`` of a function.

    ``empty`` marks the zero function, for which ``lam = +inf`` and
    ``gamma = -inf`` (the conventions for sup/inf of an empty set).
    """

    lam: float
    gamma: float
    tol: float
    empty: bool = False


def _as_index(ratio, what="value", unit=None, origin=0.0):
    k = round(ratio)
    if abs(ratio - k) > GRID_RTOL * max(1.0, abs(ratio)):
        lo, hi = np.floor(ratio), np.ceil(ratio)
        msg = f"{what} is not on the grid"
        if unit is not None:
            msg += (
                f" (step {unit:g}); nearest admissible values are "
                f"{origin + lo * unit:.12g} and {origin + hi * unit:.12g}"
            )
        raise GridError(msg)
    return int(k)


def common_step(*steps, max_factor=MAX_REFINE):
    """Largest step dividing every one of ``steps``.

    Raises :class:`GridError` when the steps are incommensurable (no common
    divisor with refinement factor up to ``max_factor``).
    """
    steps = [float(s) for s in steps]
    if any(not s > 0 for s in steps):
        raise GridError(f"steps must be positive, got {steps}")
    base = max(steps)
    lcm = 1
    for s in steps:
        # base / s = p / q in lowest terms; base / L divides s iff p | L
        frac = Fraction(base / s).limit_denominator(max_factor)
        if abs(float(frac) - base / s) > GRID_RTOL * base / s:
            raise GridError(f"steps {base:g} and {s:g} are incommensurable")
        lcm = lcm * frac.numerator // gcd(lcm, frac.numerator)
        if lcm > max_factor:
            raise GridError(f"steps {steps} need refinement beyond factor {max_factor}")
    return base / lcm


class PiecewisePoly:
    """Piecewise polynomial with bounded support.

    Args:
        grid: the supporting :class:`Grid`.
        coeffs: array of shape ``(grid.n, degree + 1)``; row ``j`` holds the
            ascending monomial coefficients of cell ``j`` in the local
            coordinate ``u in [0, 1)``.
        error: accumulated L1 error bound relative to the exact object this
            value approximates (0 for exact constructions).
    """

    __slots__ = ("grid", "coeffs", "error")

    def __init__(self, grid, coeffs, error=0.0):
        c = np.array(coeffs, dtype=complex, ndmin=2)
        if c.ndim != 2 or c.shape[0] != grid.n:
            raise ValueError(f"coeffs must have shape ({grid.n}, p+1), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        self.grid = grid
        self.coeffs = c
        self.error = float(error)

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def h(self):
        return self.grid.h

    @property
    def is_real(self):
        return not np.any(self.coeffs.imag)

    def is_zero(self):
        return not np.any(self.coeffs)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x = (t - self.grid.a) / self.grid.h
        idx = np.floor(x).astype(int)
        inside = (idx >= 0) & (idx < self.grid.n)
        j = np.where(inside, idx, 0)
        u = x - idx
        c = self.coeffs[j]
        val = c[..., -1].copy()
        for k in range(self.degree - 1, -1, -1):
            val = val * u + c[..., k]
        return np.where(inside, val, 0.0)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __repr__(self):
        g = self.grid
        return f"PiecewisePoly([{g.a:g}, {g.b:g}] x {g.n}, degree={self.degree})"


# ----------------------------------------------------------------------------
# coefficient-level helpers


def _compose_affine(coeffs, alpha, beta):
    """Coefficients of ``P(alpha + beta*v)`` given those of ``P(u)`` (last axis)."""
    p = coeffs.shape[-1] - 1
    T = np.zeros((p + 1, p + 1), dtype=complex)
    for m in range(p + 1):
        for k in range(m + 1):
            T[m, k] = comb(m, k) * alpha ** (m - k) * beta**k
    return coeffs @ T


def _pad_degree(coeffs, degree):
    extra = degree + 1 - coeffs.shape[-1]
    if extra <= 0:
        return coeffs
    return np.concatenate([coeffs, np.zeros(coeffs.shape[:-1] + (extra,), complex)], axis=-1)


def _horner(c, u):
    """Evaluate rows of ascending coefficients ``c`` (..., p+1) at ``u`` (...)."""
    val = c[..., -1] * np.ones_like(u, dtype=complex)
    for k in range(c.shape[-1] - 2, -1, -1):
        val = val * u + c[..., k]
    return val


def _regrid(f, a, n):
    """Coefficients of ``f`` on the grid starting at ``a`` with ``n`` cells of step ``f.h``.

    Cells of ``f`` falling outside the new grid are dropped.
    """
    h = f.grid.h
    off = _as_index((f.grid.a - a) / h, what=f"grid origin {f.grid.a}", unit=h, origin=a)
    out = np.zeros((n, f.coeffs.shape[1]), dtype=complex)
    lo, hi = max(0, off), min(n, off + f.grid.n)
    if lo < hi:
        out[lo:hi] = f.coeffs[lo - off : hi - off]
    return out


def to_common_grid(fs):
    """Refine and pad ``fs`` onto one grid.

    Returns ``(grid, stack)`` where ``stack`` has shape
    ``(len(fs), grid.n, degree + 1)`` with the maximal degree among ``fs``.
    """
    hc = common_step(*[f.h for f in fs])
    fs = [refine(f, round(f.h / hc)) for f in fs]
    a = min(f.grid.a for f in fs)
    b = max(f.grid.b for f in fs)
    n = _as_index((b - a) / hc, what="window", unit=hc)
    grid = Grid(a, a + n * hc, n)
    deg = max(f.degree for f in fs)
    stack = np.stack([_pad_degree(_regrid(f, a, n), deg) for f in fs])
    return grid, stack


def trim(f):
    """Drop leading and trailing cells that are identically zero."""
    nz = np.flatnonzero(np.any(f.coeffs != 0, axis=1))
    if nz.size == 0 or (nz[0] == 0 and nz[-1] == f.grid.n - 1):
        return f
    h = f.grid.h
    lo, hi = nz[0], nz[-1] + 1
    grid = Grid(f.grid.a + lo * h, f.grid.a + hi * h, hi - lo)
    return PiecewisePoly(grid, f.coeffs[lo:hi], f.error)


def zero_function(grid, degree=0):
    return PiecewisePoly(grid, np.zeros((grid.n, degree + 1), complex))


# ----------------------------------------------------------------------------
# constructors


def build_indicator(lo, hi, grid):
    """Indicator function of ``[lo, hi]`` (degree 0 on ``grid``)."""
    if not lo < hi:
        raise PreconditionError(f"indicator needs lo < hi, got [{lo}, {hi}]")
    i, j = grid.index_of(lo), grid.index_of(hi)
    if i < 0 or j > grid.n:
        raise GridError(f"[{lo}, {hi}] is not inside the grid [{grid.a}, {grid.b}]")
    c = np.zeros((grid.n, 1), complex)
    c[i:j, 0] = 1.0
    return PiecewisePoly(grid, c)


def build_poly_bump(center, halfwidth, m, grid):
    """The bump ``(1 - x**2)**m`` with ``x = (t - center)/halfwidth``, zero for ``|x| > 1``.

    It is ``C^(m-1)`` smooth and strictly positive inside its window.  Both
    window endpoints must be grid points.
    """
    if not halfwidth > 0 or int(m) != m or m < 1:
        raise PreconditionError("bump needs halfwidth > 0 and integer m >= 1")
    i = grid.index_of(center - halfwidth)
    j = grid.index_of(center + halfwidth)
    if i < 0 or j > grid.n:
        raise GridError("bump window is not inside the grid")
    # (1 - x^2)^m in ascending powers of x
    px = np.zeros(2 * m + 1, complex)
    for r in range(m + 1):
        px[2 * r] = comb(m, r) * (-1) ** r
    c = np.zeros((grid.n, 2 * m + 1), complex)
    h = grid.h
    for cell in range(i, j):
        x0 = (grid.a + cell * h - center) / halfwidth
        c[cell] = _compose_affine(px, x0, h / halfwidth)
    return PiecewisePoly(grid, c)


@lru_cache(maxsize=None)
def _cheb_interp_matrix(degree):
    """Map values at first-kind Chebyshev nodes on [0,1] to monomial coefficients in u."""
    x = npcheb.chebpts1(degree + 1)
    inv = np.linalg.inv(npcheb.chebvander(x, degree))
    to_mono = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        mono = Chebyshev.basis(k, domain=[0, 1]).convert(kind=Polynomial, domain=[0, 1], window=[0, 1])
        to_mono[:, k] = _pad_real(mono.coef, degree)
    return (x + 1) / 2, to_mono @ inv


def _pad_real(c, degree):
    out = np.zeros(degree + 1)
    out[: min(len(c), degree + 1)] = c[: degree + 1]
    return out


_CHECK_POINTS = np.array([0.0, 0.6180339887498949, 1.0])


def interpolate_cells(func, grid, degree):
    """Per-cell Chebyshev interpolation of a vectorized ``func(j, u)``.

    ``func`` receives the cell index array and the local coordinate array
    (both broadcast to the same shape).  Returns ``(coeffs, max_err)`` where
    ``max_err[j]`` is the largest deviation at three off-node check points.
    """
    nodes, M = _cheb_interp_matrix(degree)
    j = np.arange(grid.n)[:, None]
    vals = func(*np.broadcast_arrays(j, nodes[None, :]))
    coeffs = vals @ M.T
    check = func(*np.broadcast_arrays(j, _CHECK_POINTS[None, :]))
    approx = _horner(coeffs[:, None, :], _CHECK_POINTS[None, :])
    return coeffs, np.max(np.abs(check - approx), axis=1)


def from_function(func, grid, degree):
    """Interpolate ``func(t)`` cellwise at Chebyshev nodes.

    The returned function carries an L1 error estimate from the deviation at
    off-node check points.  The value-to-monomial map grows quickly with the
    degree, so keep ``degree`` below about 10; :func:`exp_poly` covers
    exponentials to full precision.
    """
    starts = grid.starts()
    h = grid.h

    def cellfunc(j, u):
        return np.asarray(func(starts[j] + h * u), dtype=complex)

    coeffs, err = interpolate_cells(cellfunc, grid, degree)
    return PiecewisePoly(grid, coeffs, error=float(np.sum(err) * h))


def exp_taylor(beta, degree):
    """Monomial coefficients of ``exp(beta*u)`` truncated at ``degree`` (last axis)."""
    beta = np.asarray(beta, dtype=complex)
    k = np.arange(degree + 1)
    return beta[..., None] ** k / np.array([factorial(i) for i in k], float)


def exp_poly(alpha, grid, degree=DEGREE_CAP):
    """``exp(alpha*t)`` on ``grid`` as a cellwise Taylor polynomial.

    The recorded error is the L1 norm of the truncated series tail.
    """
    h = grid.h
    beta = alpha * h
    c = np.exp(alpha * grid.starts())[:, None] * exp_taylor(beta, degree)[None, :]
    r = abs(beta)
    tail = r ** (degree + 1) / factorial(degree + 1) * np.exp(r)
    err = tail * h * float(np.sum(np.abs(np.exp(alpha * grid.starts()))))
    return PiecewisePoly(grid, c, err)


# ----------------------------------------------------------------------------
# linear structure and translations


def scale(f, c):
    return PiecewisePoly(f.grid, f.coeffs * c, f.error * abs(c))


def add(f, g):
    """Pointwise sum on the common refinement of both grids."""
    if f.grid.same_as(g.grid):
        deg = max(f.degree, g.degree)
        c = _pad_degree(f.coeffs, deg) + _pad_degree(g.coeffs, deg)
        return PiecewisePoly(f.grid, c, f.error + g.error)
    grid, stack = to_common_grid([f, g])
    return PiecewisePoly(grid, stack[0] + stack[1], f.error + g.error)


def shift(f, lam):
    """Translation ``t -> f(t - lam)``; ``lam`` must be a multiple of ``f.h``."""
    h = f.grid.h
    k = _as_index(lam / h, what=f"shift {lam}", unit=h)
    if k == 0:
        return f
    return PiecewisePoly(Grid(f.grid.a + k * h, f.grid.b + k * h, f.grid.n), f.coeffs, f.error)


def reflect(f):
    """``t -> f(-t)``."""
    c = _compose_affine(f.coeffs[::-1], 1.0, -1.0)
    return PiecewisePoly(Grid(-f.grid.b, -f.grid.a, f.grid.n), c, f.error)


def refine(f, factor):
    """Split every cell into ``factor`` equal cells; the function is unchanged."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("refinement factor must be >= 1")
    if factor == 1:
        return f
    parts = [_compose_affine(f.coeffs, q / factor, 1.0 / factor) for q in range(factor)]
    c = np.stack(parts, axis=1).reshape(f.grid.n * factor, -1)
    return PiecewisePoly(Grid(f.grid.a, f.grid.b, f.grid.n * factor), c, f.error)


# ----------------------------------------------------------------------------
# convolution


def _convolve_exact(A, B):
    """Exact cellwise convolution of coefficient arrays on a shared step (h = 1)."""
    p, q = A.shape[1] - 1, B.shape[1] - 1
    fa = np.array([factorial(m) for m in range(p + 1)], float)
    fb = np.array([factorial(m) for m in range(q + 1)], float)
    fd = np.array([factorial(d + 1) for d in range(p + q + 1)], float)
    nf, ng = A.shape[0], B.shape[0]
    out = np.zeros((nf + ng, p + q + 2), complex)
    # left pieces: int_0^s F(u) G(s-u) du
    C = convolve2d(A * fa, B * fb)
    out[: nf + ng - 1, 1:] += C / fd
    # right pieces via reflection u -> 1 - u of both factors
    Ar = _compose_affine(A, 1.0, -1.0)
    Br = _compose_affine(B, 1.0, -1.0)
    Cr = convolve2d(Ar * fa, Br * fb)
    Lr = np.zeros((nf + ng - 1, p + q + 2), complex)
    Lr[:, 1:] = Cr / fd
    out[1:] += _compose_affine(Lr, 1.0, -1.0)
    return out


def convolve(f, g, degree_cap=DEGREE_CAP):
    """Exact convolution ``(f*g)(t) = int f(s) g(t-s) ds``.

    The result has degree ``deg f + deg g + 1``; above ``degree_cap`` it is
    projected down cellwise and the projection error is added to ``error``.
    """
    if not abs(f.h - g.h) <= GRID_RTOL * max(f.h, g.h):
        hc = common_step(f.h, g.h)
        f, g = refine(f, round(f.h / hc)), refine(g, round(g.h / hc))
    h = f.h
    coeffs = _convolve_exact(f.coeffs, g.coeffs) * h
    n = f.grid.n + g.grid.n
    a = f.grid.a + g.grid.a
    err = 0.0
    if f.error or g.error:
        err = l1_norm(f) * g.error + l1_norm(g) * f.error + f.error * g.error
    out = PiecewisePoly(Grid(a, a + n * h, n), coeffs, err)
    if out.degree > degree_cap:
        out, perr = project(out, degree=degree_cap)
    return out


def conv_power(f, k, degree_cap=DEGREE_CAP):
    """``k``-fold convolution power of ``f`` (``k >= 1``)."""
    if int(k) != k or k < 1:
        raise PreconditionError("convolution power needs an integer k >= 1")
    out = f
    for _ in range(int(k) - 1):
        out = convolve(out, f, degree_cap)
    return out


# ----------------------------------------------------------------------------
# integrals and norms


def integral(f):
    """Exact ``int f(t) dt``."""
    m = np.arange(f.degree + 1)
    return complex(f.grid.h * np.sum(f.coeffs / (m + 1)))


def l2_norm(f):
    p = f.degree
    H = 1.0 / (np.arange(p + 1)[:, None] + np.arange(p + 1)[None, :] + 1)
    q = np.einsum("jm,ml,jl->", f.coeffs, H, f.coeffs.conj())
    return float(np.sqrt(max(q.real, 0.0) * f.grid.h))


def _abs_integral_real(c):
    """Exact ``int_0^1 |P(u)| du`` for one real polynomial (ascending coefficients)."""
    c = np.trim_zeros(np.asarray(c, float), "b")
    if c.size == 0:
        return 0.0
    if c.size == 1:
        return abs(c[0])
    anti = nppoly.polyint(c)
    if c.size == 2:
        cuts = [-c[0] / c[1]]
    else:
        r = nppoly.polyroots(c)
        cuts = r.real[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r.real))]
    pts = np.concatenate([[0.0], np.sort([x for x in cuts if 0.0 < x < 1.0]), [1.0]])
    vals = nppoly.polyval(pts, anti)
    return float(np.sum(np.abs(np.diff(vals))))


@lru_cache(maxsize=None)
def _gauss01(q):
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1) / 2, w / 2


def _abs_integral_complex(C, rtol=1e-14, max_intervals=200_000):
    """Adaptive Gauss-Legendre for ``int_0^1 |P_j(u)| du`` over rows of ``C``.

    Each panel uses ``2p + 4`` nodes and is compared with its two halves
    (Richardson-style estimate).  Returns ``(values, error_estimates)``.
    """
    ncell, P = C.shape
    x, w = _gauss01(2 * (P - 1) + 4)
    scale_ = np.sum(np.abs(C), axis=1)
    vals = np.zeros(ncell)
    errs = np.zeros(ncell)
    cell = np.arange(ncell)
    lo = np.zeros(ncell)
    wid = np.ones(ncell)

    def panel(cidx, l, d):
        u = l[:, None] + d[:, None] * x[None, :]
        return d * (np.abs(_horner(C[cidx][:, None, :], u)) @ w)

    whole = panel(cell, lo, wid)
    total_panels = ncell
    while cell.size:
        half = wid / 2
        left = panel(cell, lo, half)
        right = panel(cell, lo + half, half)
        fine = left + right
        est = np.abs(fine - whole)
        ok = (est <= rtol * np.maximum(scale_[cell], 1e-300) * wid) | (wid < 1e-9)
        total_panels += 2 * cell.size
        if total_panels > max_intervals:
            ok[:] = True
        np.add.at(vals, cell[ok], fine[ok])
        np.add.at(errs, cell[ok], est[ok])
        keep = ~ok
        cell = np.concatenate([cell[keep], cell[keep]])
        lo = np.concatenate([lo[keep], lo[keep] + half[keep]])
        wid = np.concatenate([half[keep], half[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    return vals, errs


def _cell_l1(f):
    """Per-cell L1 masses and their error estimates."""
    C = f.coeffs
    h = f.grid.h
    real_rows = ~np.any(C.imag != 0, axis=1)
    vals = np.zeros(f.grid.n)
    errs = np.zeros(f.grid.n)
    for j in np.flatnonzero(real_rows):
        vals[j] = _abs_integral_real(C[j].real)
    cx = np.flatnonzero(~real_rows)
    if cx.size:
        v, e = _abs_integral_complex(C[cx])
        vals[cx], errs[cx] = v, e
    return vals * h, errs * h


def _restrict(f, lo, hi):
    """Copy of ``f`` on the cells meeting ``[lo, hi]``, cut exactly at ``lo`` and ``hi``.

    The result uses a non-uniform set of cells, so it is returned as a list of
    ``(coeffs, width)`` pairs only for internal norm evaluation.
    """
    g = f.grid
    h = g.h
    lo = max(lo, g.a)
    hi = min(hi, g.b)
    if not lo < hi:
        return np.zeros((0, f.coeffs.shape[1]), complex), np.zeros(0)
    j0 = int(np.floor((lo - g.a) / h))
    j1 = min(int(np.ceil((hi - g.a) / h)), g.n)
    rows, widths = [], []
    for j in range(max(j0, 0), j1):
        t0 = g.a + j * h
        u0 = max(0.0, (lo - t0) / h)
        u1 = min(1.0, (hi - t0) / h)
        if u1 <= u0:
            continue
        rows.append(_compose_affine(f.coeffs[j], u0, u1 - u0))
        widths.append((u1 - u0) * h)
    return np.array(rows).reshape(-1, f.coeffs.shape[1]), np.array(widths)


def l1_norm_with_error(f, lo=None, hi=None):
    """``int_{lo}^{hi} |f(t)| dt`` together with a quadrature error estimate.

    Real cells are integrated exactly by splitting at the sign changes of the
    polynomial; genuinely complex cells use adaptive Gauss quadrature.
    """
    if lo is None and hi is None:
        vals, errs = _cell_l1(f)
        return float(np.sum(vals)), float(np.sum(errs))
    lo = f.grid.a if lo is None else lo
    hi = f.grid.b if hi is None else hi
    rows, widths = _restrict(f, lo, hi)
    if rows.shape[0] == 0:
        return 0.0, 0.0
    total, err = 0.0, 0.0
    real_rows = ~np.any(rows.imag != 0, axis=1)
    for r in np.flatnonzero(real_rows):
        total += _abs_integral_real(rows[r].real) * widths[r]
    cx = np.flatnonzero(~real_rows)
    if cx.size:
        v, e = _abs_integral_complex(rows[cx])
        total += float(v @ widths[cx])
        err += float(e @ widths[cx])
    return float(total), err


def l1_norm(f, lo=None, hi=None):
    """L1 norm ``int |f|``, optionally restricted to ``[lo, hi]``."""
    return l1_norm_with_error(f, lo, hi)[0]


def support_endpoints(f, tol=None):
    """Numerical support endpoints ``(Lambda, Gamma)`` resolved to one cell.

    ``Lambda`` is the largest grid point with at most ``tol`` of L1 mass to
    its left, ``Gamma`` the smallest with at most ``tol`` to its right.  The
    default ``tol`` is ``1e-12 * ||f||_1``.
    """
    masses, _ = _cell_l1(f)
    total = float(np.sum(masses))
    if tol is None:
        tol = 1e-12 * total
    if tol <= 0 and total > 0:
        tol = 0.0
    if total == 0.0:
        return SupportInfo(np.inf, -np.inf, float(tol), empty=True)
    left = np.concatenate([[0.0], np.cumsum(masses)])
    right = np.concatenate([[0.0], np.cumsum(masses[::-1])])
    j = int(np.flatnonzero(left <= tol)[-1])
    k = int(np.flatnonzero(right <= tol)[-1])
    h = f.grid.h
    return SupportInfo(f.grid.a + j * h, f.grid.b - k * h, float(tol))


# ----------------------------------------------------------------------------
# projection


@lru_cache(maxsize=None)
def _legendre_to_mono(degree):
    """Columns: monomial coefficients in u of shifted Legendre ``P_k(2u - 1)``."""
    M = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        mono = Legendre.basis(k, domain=[0, 1]).convert(kind=Polynomial, domain=[0, 1], window=[0, 1])
        M[:, k] = _pad_real(mono.coef, degree)
    return M


def project(f, grid=None, degree=None):
    """L2-best cellwise polynomial fit of ``f`` on ``grid`` with ``degree``.

    Returns ``(g, err)`` where ``err`` is the L1 norm of ``f - g`` (including
    any mass of ``f`` outside ``grid``).  ``g.error`` accumulates ``err``.
    """
    grid = f.grid if grid is None else grid
    degree = f.degree if degree is None else int(degree)
    if grid.same_as(f.grid) and degree >= f.degree:
        return PiecewisePoly(f.grid, _pad_degree(f.coeffs, degree), f.error), 0.0
    hc = common_step(f.h, grid.h)
    fine = refine(f, round(f.h / hc))
    r = round(grid.h / hc)
    nfine = grid.n * r
    F = _regrid(fine, grid.a, nfine)
    outside = l1_norm(fine, hi=grid.a) + l1_norm(fine, lo=grid.b)
    x, w = _gauss01((fine.degree + degree) // 2 + 2)
    q = np.arange(r)
    # target-cell coordinate of every quadrature node, per sub-cell
    u = (q[:, None] + x[None, :]) / r
    vals = _horner(F.reshape(grid.n, r, 1, -1), x[None, None, :])
    leg = np.polynomial.legendre.legvander(2 * u - 1, degree)
    L = np.einsum("nqg,qgk,g->nk", vals, leg, w) / r
    L *= 2 * np.arange(degree + 1) + 1
    coeffs = L @ _legendre_to_mono(degree).T
    g = PiecewisePoly(grid, coeffs)
    deg = max(fine.degree, degree)
    diff = _pad_degree(F, deg) - _pad_degree(refine(g, r).coeffs, deg)
    err = l1_norm(PiecewisePoly(Grid(grid.a, grid.b, nfine), diff)) + outside
    return PiecewisePoly(grid, coeffs, f.error + err), err
