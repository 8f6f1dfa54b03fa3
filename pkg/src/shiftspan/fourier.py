"""Entire Fourier transforms of piecewise polynomials and their zeros.

The transform ``F(z) = int exp(i z t) f(t) dt`` is evaluated in closed form
from the cell moments ``M_m(w) = int_0^1 u^m exp(i w u) du`` with
``w = z*h``.  Zeros are located with the argument principle (adaptive
Gauss-Kronrod on rectangle contours), quadrisection, a Delves-Lyness
centroid and Newton polishing on the appropriate derivative.
"""

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .errors import ContourError, NumericalBudgetError, PreconditionError
from .parallel import pmap
from .pwfunc import l1_norm

ZERO_TOL = 1e-9
CLUSTER_RADIUS = 1e-6
MATCH_RADIUS = 1e-6
EDGE_TOL = 1e-12
BOX_BUDGET = 10_000
MULT_CAP = 8
TAYLOR_RADIUS = 0.5
_CHUNK = 2048


# ----------------------------------------------------------------------------
# moments and transforms


def exp_moments(w, mmax):
    """``M_m(w) = int_0^1 u^m exp(i w u) du`` for ``m = 0..mmax``.

    Uses a Taylor series for ``|w| < 1/2``, the upward recurrence for
    ``m <= |w|`` and a downward (Miller) recurrence for ``m > |w|``; each is
    the stable direction in its range.
    """
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    w = w.ravel()
    out = np.empty((w.size, mmax + 1), dtype=complex)
    aw = np.abs(w)
    small = aw < TAYLOR_RADIUS
    if small.any():
        K = 32
        k = np.arange(K)
        fact = np.array([factorial(i) for i in k], float)
        terms = (1j * w[small, None]) ** k / fact
        m = np.arange(mmax + 1)
        out[small] = terms @ (1.0 / (m[None, :] + k[:, None] + 1))
    big = ~small
    if big.any():
        wb = w[big]
        iw = 1j * wb
        e = np.exp(iw)
        up = np.empty((wb.size, mmax + 1), dtype=complex)
        up[:, 0] = (e - 1.0) / iw
        for m in range(1, mmax + 1):
            up[:, m] = (e - m * up[:, m - 1]) / iw
        need = np.abs(wb) < mmax
        if need.any():
            wd, ed, iwd = wb[need], e[need], iw[need]
            N = mmax + 40 + 2 * int(np.ceil(np.max(np.abs(wd))))
            cur = ed / (N + 1 + iwd)
            down = np.empty((wd.size, mmax + 1), dtype=complex)
            with np.errstate(over="ignore", invalid="ignore"):
                for m in range(N - 1, -1, -1):
                    cur = (ed - iwd * cur) / (m + 1)
                    if m <= mmax:
                        down[:, m] = cur
            use_down = np.arange(mmax + 1)[None, :] > np.abs(wd)[:, None]
            sub = up[need]
            sub[use_down] = down[use_down]
            up[need] = sub
        out[big] = up
    return out.reshape(shape + (mmax + 1,))


def ft_derivs(f, z, kmax=0):
    """Transform derivatives ``F^(k)(z) = int (i t)^k exp(i z t) f(t) dt``, ``k = 0..kmax``.

    Returns an array of shape ``z.shape + (kmax + 1,)``.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    h = f.grid.h
    t = f.grid.starts()
    C = f.coeffs
    P = C.shape[1]
    out = np.empty((zf.size, kmax + 1), dtype=complex)
    tpow = [t**q for q in range(kmax + 1)]
    for s in range(0, zf.size, _CHUNK):
        zc = zf[s : s + _CHUNK]
        M = exp_moments(zc * h, P - 1 + kmax)
        E = np.exp(1j * zc[:, None] * t[None, :])
        T = [(E * tpow[q]) @ C for q in range(kmax + 1)]
        for k in range(kmax + 1):
            acc = np.zeros(zc.size, dtype=complex)
            for r in range(k + 1):
                acc += comb(k, r) * h**r * np.sum(M[:, r : r + P] * T[k - r], axis=1)
            out[s : s + zc.size, k] = (1j) ** k * h * acc
    return out.reshape(shape + (kmax + 1,))


def ft_eval(f, z):
    """The Fourier transform ``int exp(i z t) f(t) dt`` at ``z`` (scalar or array)."""
    val = ft_derivs(f, z, 0)[..., 0]
    return complex(val) if np.ndim(val) == 0 else val


def ft_derivative(f, z, k):
    """``k``-th derivative of the transform at ``z``."""
    val = ft_derivs(f, z, int(k))[..., int(k)]
    return complex(val) if np.ndim(val) == 0 else val


# ----------------------------------------------------------------------------
# rectangles and contour integrals


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]`` in the complex plane."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        for k in ("x0", "x1", "y0", "y1"):
            object.__setattr__(self, k, float(getattr(self, k)))
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise PreconditionError(f"degenerate rectangle {self.as_list()}")

    @classmethod
    def of(cls, r):
        return r if isinstance(r, Rect) else cls(*r)

    def as_list(self):
        return [self.x0, self.x1, self.y0, self.y1]

    @property
    def diameter(self):
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    def contains(self, z, margin=0.0):
        return (
            self.x0 - margin <= z.real <= self.x1 + margin
            and self.y0 - margin <= z.imag <= self.y1 + margin
        )

    def vertices(self):
        return [
            complex(self.x0, self.y0),
            complex(self.x1, self.y0),
            complex(self.x1, self.y1),
            complex(self.x0, self.y1),
        ]

    def expanded(self, d):
        return Rect(self.x0 - d, self.x1 + d, self.y0 - d, self.y1 + d)


# Gauss-Kronrod 7-15 (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from the left)
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[[9, 11, 13]] = _WG[2::-1]


def _contour_moments(f, vertices, tol, max_segments=20_000):
    """``(1/2 pi i) * contour integral of z^p F'(z)/F(z) dz`` for ``p = 0, 1``.

    Returns ``(moments, min_abs_F, n_segments)``.  Raises
    :class:`NumericalBudgetError` if adaptivity exhausts ``max_segments``.
    """
    verts = list(vertices) + [vertices[0]]
    a = np.array(verts[:-1], dtype=complex)
    b = np.array(verts[1:], dtype=complex)
    length = float(np.sum(np.abs(b - a)))
    total = np.zeros(2, dtype=complex)
    min_abs = np.inf
    nseg = a.size
    while a.size:
        mid = (a + b) / 2
        half = (b - a) / 2
        pts = mid[:, None] + half[:, None] * _NODES[None, :]
        D = ft_derivs(f, pts, 1)
        F, dF = D[..., 0], D[..., 1]
        absF = np.abs(F)
        min_abs = min(min_abs, float(np.min(absF)))
        with np.errstate(divide="ignore", invalid="ignore"):
            g = dF / F
        if not np.all(np.isfinite(g)):
            raise ContourError("transform vanishes on the contour")
        vals = np.stack([g, g * pts])  # (2, nseg, 15)
        K = half * (vals @ _WK)
        G = half * (vals @ _WG_FULL)
        scale_ = np.maximum(1.0, np.abs(mid))
        err = np.max(np.abs(K - G) / np.array([np.ones_like(scale_), scale_]), axis=0) / (2 * np.pi)
        share = tol * np.abs(b - a) / length
        ok = (err <= share) | (np.abs(half) < 1e-14 * max(1.0, length))
        total += np.sum(K[:, ok], axis=1)
        keep = ~ok
        nseg += int(np.count_nonzero(keep))
        if nseg > max_segments:
            raise NumericalBudgetError("contour quadrature exceeded its segment budget")
        a_k, b_k, m_k = a[keep], b[keep], mid[keep]
        a = np.concatenate([a_k, m_k])
        b = np.concatenate([m_k, b_k])
    return total / (2j * np.pi), min_abs, nseg


def _box_moments(f, rect, tol=1e-7, edge_tol=EDGE_TOL):
    """Winding count and first Delves-Lyness moment of a box, without perturbation."""
    for attempt in range(3):
        mom, min_abs, _ = _contour_moments(f, rect.vertices(), tol)
        if min_abs <= edge_tol:
            raise ContourError(f"|F| = {min_abs:.3g} on the boundary of {rect.as_list()}")
        count = mom[0].real
        if abs(count - round(count)) <= 0.25 and abs(mom[0].imag) <= 0.25:
            return int(round(count)), complex(mom[1])
        tol *= 1e-2
    raise NumericalBudgetError(
        f"winding integral over {rect.as_list()} did not settle near an integer ({mom[0]:.4g})"
    )


def winding_count(f, rect, edge_tol=EDGE_TOL, max_perturb=5):
    """Number of zeros (with multiplicity) of the transform inside ``rect``.

    The contour integral of ``F'/F`` is refined until it lies within 0.25 of
    an integer.  If a zero sits on or very near the contour, the rectangle is
    enlarged slightly and the count retried; :class:`ContourError` is raised
    after ``max_perturb`` attempts.
    """
    return _robust_box(f, Rect.of(rect), edge_tol, max_perturb)[0]


def _robust_box(f, rect, edge_tol=EDGE_TOL, max_perturb=5):
    size = max(rect.x1 - rect.x0, rect.y1 - rect.y0)
    last = None
    for attempt in range(max_perturb + 1):
        r = rect if attempt == 0 else rect.expanded(size * 1e-3 * attempt * (1 + 0.618 * attempt))
        try:
            count, s1 = _box_moments(f, r, edge_tol=edge_tol)
            return count, s1, r
        except NumericalBudgetError as exc:
            last = exc
    raise ContourError(
        f"could not find a zero-free contour near {rect.as_list()} ({last}); try a different rectangle"
    )


# ----------------------------------------------------------------------------
# zero atlases


@dataclass
class ZeroRecord:
    """A located zero ``z`` of multiplicity ``mult``."""

    z: complex
    mult: int
    residual: float
    box: tuple
    flagged: bool = False

    def to_dict(self):
        return {
            "re": self.z.real,
            "im": self.z.imag,
            "mult": self.mult,
            "residual": self.residual,
            "flagged": self.flagged,
        }


@dataclass
class ZeroAtlas:
    """Zeros of one transform, or common zeros of a family, inside ``rect``.

    An empty atlas only means "no zeros within rect"; nothing is claimed
    about the rest of the plane.
    """

    rect: Rect
    zeros: list
    family_size: int = 1
    complete: bool = True
    notes: list = field(default_factory=list)

    @property
    def total_mult(self):
        return sum(r.mult for r in self.zeros)

    def locations(self):
        return np.array([r.z for r in self.zeros], dtype=complex)

    def describe(self):
        if not self.zeros:
            return f"empty within rect {self.rect.as_list()}"
        return f"{len(self.zeros)} zero(s) within rect {self.rect.as_list()}"

    def to_dict(self):
        return {
            "rect": self.rect.as_list(),
            "zeros": [r.to_dict() for r in self.zeros],
            "complete": self.complete,
            "family_size": self.family_size,
            "notes": list(self.notes),
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "mult", "residual", "flagged"])
        for r in self.zeros:
            w.writerow([repr(r.z.real), repr(r.z.imag), r.mult, repr(r.residual), int(r.flagged)])
        return buf.getvalue()


def deriv_tol(f, k, zero_tol=ZERO_TOL):
    """Tolerance for ``|F^(k)|`` at a certified zero: ``zero_tol * max(1, R)**k``.

    ``R`` bounds ``|t|`` on the support, which is the natural growth factor
    of the ``k``-th derivative.
    """
    R = max(abs(f.grid.a), abs(f.grid.b), 1.0)
    return zero_tol * R**k


def _polish(f, z, m, box, zero_tol):
    """Newton on ``F^(m-1)``; certify that ``F^(j)`` vanishes for ``j < m``."""
    margin = 1e-9 * max(1.0, box.diameter)
    converged = False
    for _ in range(60):
        D = ft_derivs(f, z, m)
        step = D[m - 1] / D[m] if D[m] != 0 else np.inf
        if not np.isfinite(step):
            return z, False
        z = z - step
        if not box.contains(z, margin):
            return z, False
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            converged = True
            break
    D = ft_derivs(f, z, m - 1)
    small = all(abs(D[j]) <= deriv_tol(f, j, zero_tol) for j in range(m))
    if not converged:
        converged = abs(D[m - 1]) <= 1e-13 * deriv_tol(f, m - 1, 1.0) * max(1.0, l1_norm(f))
    return z, bool(converged and small)


def _split_box(f, box):
    """Four children of ``box``, with split lines kept away from zeros."""
    fracs = 0.5123 + np.array([0.0, -0.03, 0.03, -0.06, 0.06, -0.1, 0.1])
    ys = np.linspace(box.y0, box.y1, 33)
    xs = np.linspace(box.x0, box.x1, 33)

    def best(lo, hi, line):
        scores = []
        for fr in fracs:
            c = lo + fr * (hi - lo)
            scores.append(float(np.min(np.abs(ft_eval(f, line(c))))))
        return lo + fracs[int(np.argmax(scores))] * (hi - lo)

    xm = best(box.x0, box.x1, lambda c: c + 1j * ys)
    ym = best(box.y0, box.y1, lambda c: xs + 1j * c)
    return [
        Rect(box.x0, xm, box.y0, ym),
        Rect(box.x0, xm, ym, box.y1),
        Rect(xm, box.x1, box.y0, ym),
        Rect(xm, box.x1, ym, box.y1),
    ]


def zero_search(
    f,
    rect,
    zero_tol=ZERO_TOL,
    cluster_radius=CLUSTER_RADIUS,
    budget=BOX_BUDGET,
    edge_tol=EDGE_TOL,
):
    """Locate every zero of the transform of ``f`` inside ``rect``.

    Boxes with a nonzero winding count are first tested for a single zero of
    full multiplicity (Delves-Lyness centroid polished by Newton on
    ``F^(m-1)``); otherwise they are quadrisected.  The atlas is flagged
    incomplete when the box budget runs out or the child counts do not add
    up.
    """
    rect = Rect.of(rect)
    total, s1, rect = _robust_box(f, rect, edge_tol)
    atlas = ZeroAtlas(rect, [])
    work = deque([(rect, total, s1, 0)])
    nboxes = 1
    while work:
        box, m, s1, failures = work.popleft()
        if m == 0:
            continue
        centroid = s1 / m
        if m <= MULT_CAP and box.contains(centroid):
            z, ok = _polish(f, centroid, m, box, zero_tol)
            if ok:
                atlas.zeros.append(ZeroRecord(complex(z), m, abs(ft_eval(f, z)), tuple(box.as_list())))
                continue
        if box.diameter < cluster_radius or (m == 1 and failures >= 5):
            if m > MULT_CAP:
                raise PreconditionError(f"zero cluster of multiplicity {m} exceeds the cap {MULT_CAP}")
            c = complex((box.x0 + box.x1) / 2, (box.y0 + box.y1) / 2)
            atlas.zeros.append(ZeroRecord(c, m, abs(ft_eval(f, c)), tuple(box.as_list()), flagged=True))
            atlas.notes.append(f"unpolished zero cluster near {c:.6g}")
            continue
        if nboxes + 4 > budget:
            atlas.complete = False
            atlas.notes.append("box budget exhausted")
            break
        children = _split_box(f, box)
        try:
            results = pmap(lambda r: _box_moments(f, r, edge_tol=edge_tol), children)
        except NumericalBudgetError as exc:
            atlas.complete = False
            atlas.notes.append(f"sub-box count failed: {exc}")
            continue
        nboxes += 4
        if sum(c for c, _ in results) != m:
            atlas.complete = False
            atlas.notes.append(f"child counts do not add up in {box.as_list()}")
        nf = failures + 1 if m == 1 else failures
        for child, (c, s) in zip(children, results):
            work.append((child, c, s, nf))
    atlas.zeros = _merge(atlas.zeros, cluster_radius)
    atlas.zeros.sort(key=lambda r: (r.z.real, r.z.imag))
    if atlas.complete and atlas.total_mult != total:
        atlas.complete = False
        atlas.notes.append("multiplicities do not add up to the winding count")
    return atlas


def _merge(zeros, radius):
    out = []
    for r in sorted(zeros, key=lambda r: (r.z.real, r.z.imag)):
        if out and abs(out[-1].z - r.z) <= radius:
            keep = out[-1]
            keep.mult += r.mult
            keep.flagged = True
            continue
        out.append(r)
    return out


def common_zeros(fs, rect, zero_tol=ZERO_TOL, match_radius=MATCH_RADIUS):
    """Common zeros of a family with multiplicity ``min`` over the members.

    Member atlases are intersected by proximity, visiting candidate zeros in
    order of increasing modulus; two candidates within ``match_radius`` mark
    the atlas as ambiguous instead of guessing.
    """
    fs = list(fs)
    if not fs:
        raise PreconditionError("common_zeros needs at least one function")
    rect = Rect.of(rect)
    atlases = pmap(lambda f: zero_search(f, rect, zero_tol), fs)
    out = ZeroAtlas(atlases[0].rect, [], family_size=len(fs))
    out.complete = all(a.complete for a in atlases)
    for a in atlases:
        out.notes.extend(a.notes)
    base = sorted(atlases[0].zeros, key=lambda r: (abs(r.z), r.z.real, r.z.imag))
    for rec in base:
        mult, residual, flagged = rec.mult, rec.residual, rec.flagged
        for other in atlases[1:]:
            d = np.array([abs(o.z - rec.z) for o in other.zeros])
            hits = np.flatnonzero(d <= match_radius) if d.size else np.array([], int)
            if hits.size == 0:
                mult = 0
                break
            if hits.size > 1:
                flagged = True
                out.notes.append(f"ambiguous match near {rec.z:.6g}")
            o = other.zeros[int(hits[np.argmin(d[hits])])]
            mult = min(mult, o.mult)
            residual = max(residual, o.residual)
        if mult > 0:
            out.zeros.append(ZeroRecord(rec.z, mult, residual, rec.box, flagged))
    out.zeros.sort(key=lambda r: (r.z.real, r.z.imag))
    return out


@dataclass
class SubsetReport:
    """Outcome of checking ``V(E)`` against the zeros of one function.

    A pair ``(z, m)`` of the atlas uses standard multiplicity: derivatives
    ``0..m-1`` vanish.  In the indexing where ``(z, n)`` means derivatives
    ``0..n`` vanish, it corresponds to ``n = m - 1``.
    """

    holds: bool
    rect: list
    checked: int
    violation: dict = None

    def to_dict(self):
        return {
            "holds": self.holds,
            "rect": self.rect,
            "checked": self.checked,
            "violation": self.violation,
            "scope": "relative to rect",
        }


def v_subset_check(atlas, f, zero_tol=ZERO_TOL):
    """Does every zero ``(z, m)`` of ``atlas`` vanish to order ``m`` for ``f``?

    Returns ``(holds, report)``; the report names the first violated pair.
    """
    for rec in atlas.zeros:
        D = ft_derivs(f, rec.z, rec.mult - 1)
        for k in range(rec.mult):
            if abs(D[k]) > deriv_tol(f, k, zero_tol):
                v = {
                    "re": rec.z.real,
                    "im": rec.z.imag,
                    "mult": rec.mult,
                    "order": k,
                    "index_n": rec.mult - 1,
                    "abs_derivative": float(abs(D[k])),
                }
                return False, SubsetReport(False, atlas.rect.as_list(), len(atlas.zeros), v)
    return True, SubsetReport(True, atlas.rect.as_list(), len(atlas.zeros))
