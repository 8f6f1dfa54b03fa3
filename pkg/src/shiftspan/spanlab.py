"""Density experiments for spans of shifted generators.

The primal side computes L2-best approximations from a finite shift
dictionary and reports their L1 residual.  The dual side turns a common zero
``z0`` of the generators into a lower bound on every achievable L1 error:
the functional ``f -> int e^{i z0 t} f(t) dt`` kills every atom, so
``|target^(z0)| <= e^{|Im z0| R} ||target - f||_1`` for every combination ``f``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalBudgetError, PreconditionError
from .fourier import MATCH_RADIUS, ZERO_TOL, Rect, common_zeros, ft_eval, v_subset_check, zero_search
from .opalg import example_construction
from .parallel import pmap
from .pwfunc import (
    PiecewisePoly,
    common_step,
    l1_norm,
    refine,
    shift,
    support_endpoints,
    to_common_grid,
)

DICT_CAP = 5000
RIDGE_REL = 1e-10
CERT_TOL = 1e-6
SOLVE_TOL = 1e-8
MAX_REFINEMENTS = 6
E_ALPHA_READING = "E_alpha = {g in E : supp(g) inside [-alpha, alpha]}"


@dataclass
class ShiftSpanSpec:
    """Generators ``E`` with shifts ``lambda`` on ``{lo, lo + step, ...} <= hi``."""

    generators: list
    shift_lo: float
    shift_hi: float
    step: float

    def __post_init__(self):
        if not self.generators:
            raise PreconditionError("generator set is empty")
        if any(g.is_zero() for g in self.generators):
            raise PreconditionError("a generator is identically zero")
        if not self.shift_lo <= self.shift_hi:
            raise PreconditionError(f"shift_lo {self.shift_lo} > shift_hi {self.shift_hi}")
        if not self.step > 0:
            raise PreconditionError(f"step must be positive, got {self.step}")

    @property
    def shifts(self):
        k = int(np.floor((self.shift_hi - self.shift_lo) / self.step * (1 + 1e-12) + 1e-9))
        return self.shift_lo + self.step * np.arange(k + 1)

    def with_step(self, step):
        return ShiftSpanSpec(self.generators, self.shift_lo, self.shift_hi, step)


def _shiftable(g, step, lo):
    """Refine ``g`` so that ``step`` and ``lo`` are multiples of its cell width."""
    steps = [g.h, step] + ([abs(lo)] if lo != 0 else [])
    hc = common_step(*steps)
    return refine(g, round(g.h / hc))


def build_dictionary(spec, cap=DICT_CAP):
    """All atoms ``shift(g, lam)``, generator-major and shift-minor."""
    lams = spec.shifts
    size = len(lams) * len(spec.generators)
    if size > cap:
        raise NumericalBudgetError(f"dictionary size {size} exceeds cap {cap}; enlarge step or cap")
    atoms = []
    for g in spec.generators:
        gr = _shiftable(g, spec.step, spec.shift_lo)
        atoms.extend(shift(gr, float(lam)) for lam in lams)
    return atoms


@dataclass
class ApproxResult:
    coeffs: np.ndarray
    l2_err: float
    l1_err: float
    gram_cond: float
    ridge: float
    step: float = None
    solve_residual: float = 0.0
    window: tuple = None
    approximation: PiecewisePoly = field(default=None, repr=False)

    def to_dict(self):
        return {
            "step": self.step,
            "n_atoms": int(len(self.coeffs)),
            "l2_err": self.l2_err,
            "l1_err": self.l1_err,
            "gram_cond": self.gram_cond,
            "ridge": self.ridge,
            "solve_residual": self.solve_residual,
            "window": list(self.window),
            "coeffs_re": np.real(self.coeffs).tolist(),
            "coeffs_im": np.imag(self.coeffs).tolist(),
        }


def _hilbert(d):
    k = np.arange(d)
    return 1.0 / (k[:, None] + k[None, :] + 1.0)


def _gram(X, h):
    """``G[i, j] = <a_j, a_i>`` from stacked cell coefficients ``X``; also returns ``X @ H``."""
    XH = X @ _hilbert(X.shape[2])
    G = h * np.einsum("icd,jcd->ij", X.conj(), XH)
    return 0.5 * (G + G.conj().T), XH


def gram_matrix(fs):
    """Exact L2 Gram matrix of a list of functions."""
    grid, X = to_common_grid(list(fs))
    if all(f.is_real for f in fs):
        X = X.real
    return _gram(X, grid.h)[0]


def gram_and_solve(target, spec, ridge=None, cap=DICT_CAP):
    """L2-best approximation of ``target`` from the shift dictionary of ``spec``.

    The Gram matrix ``G[i, j] = <a_j, a_i>`` is exact: cell products of
    monomials integrate to Hilbert-matrix entries.  The ridge-regularized
    normal equations are solved by Cholesky.  Errors are measured on the
    explicit residual function, not on the cancellation-prone quadratic form
    in the coefficients.
    """
    atoms = build_dictionary(spec, cap)
    grid, X = to_common_grid(atoms + [target])
    T, X = X[-1], X[:-1]
    h = grid.h
    H = _hilbert(X.shape[2])
    if all(f.is_real for f in atoms) and target.is_real:
        X, T = X.real, T.real
    G, XH = _gram(X, h)
    b = h * np.einsum("icd,cd->i", XH.conj(), T)
    N = G.shape[0]
    if ridge is None:
        ridge = RIDGE_REL * float(np.trace(G).real) / N
    Gr = G + ridge * np.eye(N)
    try:
        fac = scipy.linalg.cho_factor(Gr, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalBudgetError(f"Gram matrix not positive definite with ridge {ridge:g}; increase ridge") from exc
    c = scipy.linalg.cho_solve(fac, b)
    diag = np.abs(np.diag(fac[0]))
    cond = float((diag.max() / diag.min()) ** 2)
    solve_res = float(np.linalg.norm(Gr @ c - b) / max(np.linalg.norm(b), 1e-300))

    approx_coeffs = np.einsum("i,icd->cd", c, X)
    R = T - approx_coeffs
    l2 = float(np.sqrt(max(h * np.einsum("cd,cd->", R.conj() @ H, R).real, 0.0)))
    approx = PiecewisePoly(grid, approx_coeffs)
    l1 = l1_norm(PiecewisePoly(grid, R))
    return ApproxResult(
        coeffs=np.asarray(c, complex),
        l2_err=l2,
        l1_err=float(l1),
        gram_cond=cond,
        ridge=float(ridge),
        step=float(spec.step),
        solve_residual=solve_res,
        window=(grid.a, grid.b),
        approximation=approx,
    )


@dataclass
class Certificate:
    z0: complex
    bound: float
    window_radius: float
    weight: float
    target_value: float = 0.0

    def to_dict(self):
        return {
            "z0_re": self.z0.real,
            "z0_im": self.z0.imag,
            "bound": self.bound,
            "window_radius": self.window_radius,
            "weight": self.weight,
            "abs_target_transform": self.target_value,
        }


def _radius(fs):
    r = 0.0
    for f in fs:
        st = support_endpoints(f)
        if not st.empty:
            r = max(r, abs(st.lam), abs(st.gamma))
    return r


def dual_certificate(target, spec, z0, zero_tol=ZERO_TOL):
    """L1 lower bound on the distance from ``target`` to the span of ``spec``.

    Requires ``z0`` to be a common zero of the generators (checked).
    """
    z0 = complex(z0)
    for i, g in enumerate(spec.generators):
        v = abs(complex(ft_eval(g, z0)))
        if v > zero_tol:
            raise PreconditionError(
                f"z0 = {z0} is not a common zero: generator {i} has |g^(z0)| = {v:.6g} > {zero_tol:g}"
            )
    R = _radius([target])
    for g in spec.generators:
        st = support_endpoints(g)
        R = max(R, abs(st.lam + spec.shift_lo), abs(st.gamma + spec.shift_hi))
    weight = float(np.exp(-abs(z0.imag) * R))
    val = abs(complex(ft_eval(target, z0)))
    return Certificate(z0, val * weight, float(R), weight, float(val))


@dataclass
class SweepResult:
    rows: list  # ApproxResult per level
    atlas: object = None
    certificate: Certificate = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    @property
    def l1_errs(self):
        return [r.l1_err for r in self.rows]

    def to_dict(self):
        return {
            "levels": [
                {"step": r.step, "l1_err": r.l1_err, "l2_err": r.l2_err, "gram_cond": r.gram_cond, "n_atoms": len(r.coeffs)}
                for r in self.rows
            ],
            "atlas": None if self.atlas is None else self.atlas.to_dict(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "checks": self.checks,
            "passed": self.passed,
        }

    def to_csv(self):
        lines = ["level,step,l1_err,l2_err"]
        lines += [f"{i},{r.step!r},{r.l1_err!r},{r.l2_err!r}" for i, r in enumerate(self.rows)]
        return "\n".join(lines) + "\n"


def density_sweep(
    target, spec, refinements, rect=None, z0=None, ridge=None, cert_tol=CERT_TOL, zero_tol=ZERO_TOL, cap=DICT_CAP
):
    """Solve at ``step, step/2, ..., step/2^refinements``.

    With ``rect`` the common-zero atlas of the generators is computed; when it
    is empty the L1 errors must be nonincreasing.  With a certificate (from
    ``z0`` or, failing that, the smallest common zero found) every level must
    respect its bound.
    """
    refinements = int(refinements)
    if not 0 <= refinements <= MAX_REFINEMENTS:
        raise PreconditionError(f"refinements must lie in [0, {MAX_REFINEMENTS}], got {refinements}")
    res = SweepResult([])
    if rect is not None:
        res.atlas = common_zeros(spec.generators, rect, zero_tol)
        if z0 is None and res.atlas.zeros:
            z0 = min(res.atlas.locations, key=lambda z: (abs(z), z.real, z.imag))
    if z0 is not None:
        res.certificate = dual_certificate(target, spec, z0, zero_tol)
    for k in range(refinements + 1):
        res.rows.append(gram_and_solve(target, spec.with_step(spec.step / 2**k), ridge, cap))
    errs = res.l1_errs
    if target.is_zero():
        res.checks["zero_target"] = all(e == 0 for e in errs)
    if res.atlas is not None and not res.atlas.zeros:
        res.checks["monotone"] = bool(all(b <= a * (1 + 1e-9) + SOLVE_TOL for a, b in zip(errs, errs[1:])))
    if res.certificate is not None:
        res.checks["certified"] = bool(all(e >= res.certificate.bound - cert_tol for e in errs))
    return res


@dataclass
class WindowReport:
    passed: bool
    a: float
    b: float
    a0: float
    b0: float
    shifts: tuple = None
    reasons: list = field(default_factory=list)

    def to_spec(self, E, step):
        if not self.passed:
            raise PreconditionError("window conditions fail: " + "; ".join(self.reasons))
        return ShiftSpanSpec(list(E), self.shifts[0], self.shifts[1], step)

    def to_dict(self):
        return {
            "passed": self.passed,
            "a": self.a,
            "b": self.b,
            "a0": self.a0,
            "b0": self.b0,
            "shifts": None if self.shifts is None else list(self.shifts),
            "reasons": self.reasons,
        }


def window_predicate(E, a, b):
    """Check ``a < a0``, ``b > b0`` and ``b - a >= 2 (b0 - a0)`` for the hull ``[a0, b0]`` of ``E``.

    On success the admissible shifts are ``[a - a0, b - b0]``.
    """
    if not E:
        raise PreconditionError("E is empty")
    sts = [support_endpoints(g) for g in E]
    a0 = min(s.lam for s in sts)
    b0 = max(s.gamma for s in sts)
    reasons = []
    if not a < a0:
        reasons.append(f"a = {a} is not below a0 = {a0}")
    if not b > b0:
        reasons.append(f"b = {b} is not above b0 = {b0}")
    if not b - a >= 2 * (b0 - a0):
        reasons.append(f"b - a = {b - a} < 2 (b0 - a0) = {2 * (b0 - a0)}")
    ok = not reasons
    return WindowReport(ok, float(a), float(b), float(a0), float(b0), (a - a0, b - b0) if ok else None, reasons)


def sub_family(E, alpha):
    """Members of ``E`` supported inside ``[-alpha, alpha]``."""
    out = []
    for g in E:
        st = support_endpoints(g)
        if st.empty or (st.lam >= -alpha and st.gamma <= alpha):
            out.append(g)
    return out


def membership_predicate(target, E, rect, alpha=None, zero_tol=ZERO_TOL):
    """Is ``V(E) subset V(target)`` on ``rect``?  Returns ``(holds, report dict)``.

    With ``alpha`` only the members of ``E`` supported in ``[-alpha, alpha]``
    enter the check.
    """
    fam = list(E) if alpha is None else sub_family(E, alpha)
    if not fam:
        holds, rep = True, {"holds": True, "checked": 0, "violation": None}
        atlas = None
    else:
        atlas = common_zeros(fam, rect, zero_tol)
        if not atlas.complete:
            raise NumericalBudgetError("common-zero atlas incomplete; the verdict would be unreliable")
        holds, sub = v_subset_check(atlas, target, zero_tol)
        rep = sub.to_dict()
    rep["rect"] = Rect.of(rect).as_list()
    rep["scope"] = "verdict relative to rect"
    rep["atlas"] = None if atlas is None else atlas.to_dict()
    if alpha is not None:
        rep["alpha"] = alpha
        rep["interpretation"] = E_ALPHA_READING
        rep["family_size"] = len(fam)
    return holds, rep


def _has_zero(atlas, z, radius):
    return any(abs(r.z - z) <= radius for r in atlas.zeros)


def _atlas_pairs(atlas):
    return [(r.z, r.mult) for r in sorted(atlas.zeros, key=lambda r: (r.z.real, r.z.imag))]


def _same_pairs(got, want, radius):
    if len(got) != len(want):
        return False
    return all(abs(z1 - z2) <= radius and m1 == m2 for (z1, m1), (z2, m2) in zip(got, want))


@dataclass
class NondensityReport:
    removed: list
    generator_checks: list
    family_checks: list
    passed: bool
    rect: list

    def to_dict(self):
        def zs(pairs):
            return [{"re": z.real, "im": z.imag, "mult": m} for z, m in pairs]

        return {
            "rect": self.rect,
            "scope": "verdict relative to rect",
            "removed": zs(self.removed),
            "generators": [{**c, "atlas": zs(c["atlas"]), "expected": zs(c["expected"])} for c in self.generator_checks],
            "families": [{**c, "common": zs(c["common"])} for c in self.family_checks],
            "passed": self.passed,
        }


def nondensity_evidence(phi, K, rect, zero_tol=ZERO_TOL, match_radius=MATCH_RADIUS):
    """Finite-window zero evidence for the generators ``phi_1..phi_K``.

    For each ``k``: the atlas of ``phi_k`` equals that of ``phi`` without
    ``z_k`` and with the other multiplicities multiplied by ``k``; the family
    ``{phi_1..phi_k}`` has none of ``z_1..z_k`` as a common zero while each
    ``z_r`` with ``r > k`` survives in every member.
    """
    rect = Rect.of(rect)
    ex = example_construction(phi, K, rect, zero_tol)
    base = _atlas_pairs(ex.base_atlas)
    atlases = pmap(lambda g: zero_search(g, rect, zero_tol), ex.generators)
    gen_checks = []
    for k, at in enumerate(atlases, start=1):
        zk = ex.removed[k - 1][0]
        want = [(z, m * k) for z, m in base if abs(z - zk) > match_radius]
        got = _atlas_pairs(at)
        gen_checks.append(
            {"k": k, "atlas": got, "expected": want, "complete": at.complete, "ok": at.complete and _same_pairs(got, want, 1e-6)}
        )
    fam_checks = []
    for k in range(1, K + 1):
        common = common_zeros(ex.generators[:k], rect, zero_tol)
        excluded = [not _has_zero(common, z, match_radius) for z, _ in ex.removed[:k]]
        retained = [all(_has_zero(at, z, match_radius) for at in atlases[:k]) for z, _ in ex.removed[k:]]
        fam_checks.append(
            {
                "k": k,
                "common": _atlas_pairs(common),
                "excludes_removed": all(excluded),
                "retains_later": all(retained),
                "ok": common.complete and all(excluded) and all(retained),
            }
        )
    passed = all(c["ok"] for c in gen_checks) and all(c["ok"] for c in fam_checks)
    return NondensityReport(ex.removed, gen_checks, fam_checks, passed, rect.as_list())
