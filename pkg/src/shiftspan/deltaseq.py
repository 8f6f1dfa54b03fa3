"""Weak delta sequences: constructions and finite-n verification.

Limits cannot be observed by a finite computation, so every check here looks
at ``n = 1..n_max`` and requires the monitored quantity to be small at
``n_max`` with a nonincreasing last quarter.  A tail that is still strictly
decreasing but not yet small is reported as undecided rather than failed.
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fourier import ft_eval
from .parallel import pmap
from .pwfunc import (
    Grid,
    PiecewisePoly,
    add,
    build_indicator,
    convolve,
    integral,
    l1_norm,
    scale,
    support_endpoints,
)

N_MAX = 32
EPS_LIST = (0.5, 0.1, 0.01)
TRANSFORM_TOL = 0.1
MASS_TOL = 0.1
TAIL_TOL = 0.05
IDENTITY_RTOL = 0.05


@dataclass
class DeltaFamily:
    """An indexed sequence ``n -> gen(n)`` with support radius ``alpha`` and mass bound ``M``."""

    gen: Callable[[int], PiecewisePoly]
    alpha: float
    M: float
    name: str = "family"

    def __call__(self, n):
        return self.gen(n)


def make_standard(n):
    """``n * indicator[0, 1/n]`` on a grid of step ``1/(8n)``; unit mass."""
    n = int(n)
    if n < 1:
        raise ValueError("index must be >= 1")
    return scale(build_indicator(0.0, 1.0 / n, Grid(0.0, 1.0 / n, 8)), float(n))


def make_weak_nonstandard(n, alpha):
    """``n * indicator[0, 1/n] + (1/n) * indicator[alpha-1, alpha]``.

    The support radius stays ``alpha`` for every ``n`` while the far bump's
    mass ``1/n`` dies out, so this is a weak but not a standard delta sequence.
    """
    n = int(n)
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    far = scale(build_indicator(alpha - 1.0, float(alpha), Grid(alpha - 1.0, float(alpha), 1)), 1.0 / n)
    return add(make_standard(n), far)


def standard_family():
    return DeltaFamily(make_standard, alpha=1.0, M=1.0, name="standard")


def weak_nonstandard_family(alpha=2.0):
    return DeltaFamily(lambda n: make_weak_nonstandard(n, alpha), alpha=float(alpha), M=2.0, name="weak")


def constant_family(f=None):
    """The non-delta sequence ``n -> f`` (default ``indicator[0, 1]``)."""
    if f is None:
        f = build_indicator(0.0, 1.0, Grid(0.0, 1.0, 8))
    st = support_endpoints(f)
    return DeltaFamily(lambda n: f, alpha=max(abs(st.lam), abs(st.gamma)), M=l1_norm(f), name="constant")


def _trend(seq, tol):
    """'pass', 'undecided' or 'fail' for a sequence that should tend to 0."""
    seq = np.asarray(seq, float)
    q = seq[-max(2, len(seq) // 4) :]
    nonincreasing = bool(np.all(np.diff(q) <= 1e-12 * max(1.0, q[0])))
    if seq[-1] <= tol and nonincreasing:
        return "pass"
    if nonincreasing and q[-1] < q[0]:
        return "undecided"
    return "fail"


@dataclass
class ConditionsReport:
    family: str
    n_max: int
    radius: list
    mass: list
    norm: list
    tails: dict
    status: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v == "pass" for k, v in self.status.items() if k != "iv_detail")

    def to_dict(self):
        return {
            "family": self.family,
            "n_max": self.n_max,
            "radius": self.radius,
            "mass": self.mass,
            "norm": self.norm,
            "tails": {repr(k): v for k, v in self.tails.items()},
            "status": self.status,
            "passed": self.passed,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        eps = list(self.tails)
        w.writerow(["n", "radius", "mass", "norm"] + [f"tail_{e!r}" for e in eps])
        for i in range(self.n_max):
            w.writerow(
                [i + 1, repr(self.radius[i]), repr(self.mass[i]), repr(self.norm[i])]
                + [repr(self.tails[e][i]) for e in eps]
            )
        return buf.getvalue()


def _tail_mass(f, eps):
    return l1_norm(f, hi=-eps) + l1_norm(f, lo=eps)


def verify_conditions(family, n_max=N_MAX, eps_list=EPS_LIST, mass_tol=MASS_TOL, tail_tol=TAIL_TOL):
    """Check the four weak-delta conditions on ``n = 1..n_max``.

    (i) support radius ``<= family.alpha``; (ii) ``|int delta_n - 1|``
    small and nonincreasing; (iii) ``||delta_n||_1 <= family.M``; (iv) for
    every ``eps`` the mass outside ``[-eps, eps]`` small and nonincreasing.
    Condition (iv) passes when no ``eps`` fails and at least one passes;
    ``eps`` values too small to resolve at ``n_max`` come out undecided.
    """
    if n_max < 4:
        raise ValueError("n_max must be >= 4")

    def row(n):
        d = family(n)
        st = support_endpoints(d)
        radius = 0.0 if st.empty else max(abs(st.lam), abs(st.gamma))
        return radius, integral(d).real, l1_norm(d), [_tail_mass(d, e) for e in eps_list]

    rows = pmap(row, range(1, n_max + 1))
    radius = [r[0] for r in rows]
    mass = [r[1] for r in rows]
    norm = [r[2] for r in rows]
    tails = {e: [r[3][i] for r in rows] for i, e in enumerate(eps_list)}
    rep = ConditionsReport(family.name, n_max, radius, mass, norm, tails)
    rep.status["i"] = "pass" if max(radius) <= family.alpha * (1 + 1e-12) else "fail"
    rep.status["ii"] = _trend([abs(m - 1.0) for m in mass], mass_tol)
    rep.status["iii"] = "pass" if max(norm) <= family.M * (1 + 1e-12) else "fail"
    per_eps = {repr(e): _trend(tails[e], tail_tol) for e in eps_list}
    if any(v == "fail" for v in per_eps.values()) or not any(v == "pass" for v in per_eps.values()):
        rep.status["iv"] = "fail"
    else:
        rep.status["iv"] = "pass"
    rep.status["iv_detail"] = per_eps
    return rep


@dataclass
class SequenceReport:
    """A monitored error sequence with its verdict."""

    values: list
    passed: bool
    tol: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"values": self.values, "passed": self.passed, "tol": self.tol, **self.extra}


def convolution_identity_check(family, f, alpha_window, n_max=N_MAX, identity_tol=None):
    """``e_n = int_{-a}^{a} |f * delta_n - f|`` for ``n = 1..n_max``.

    Passes when ``e_{n_max} < e_1`` and ``e_{n_max} <= identity_tol``
    (default ``0.05 * ||f||_1``).
    """
    if identity_tol is None:
        identity_tol = IDENTITY_RTOL * l1_norm(f)

    def err(n):
        diff = add(convolve(f, family(n)), scale(f, -1.0))
        return l1_norm(diff, -alpha_window, alpha_window)

    e = pmap(err, range(1, n_max + 1))
    ok = e[-1] < e[0] and e[-1] <= identity_tol
    return SequenceReport(e, bool(ok), float(identity_tol))


def transform_limit_check(family, zs, n_max=N_MAX, transform_tol=TRANSFORM_TOL):
    """Track ``|delta_n^(z) - 1|`` for each ``z``; pass iff small at ``n_max`` with a nonincreasing last quarter."""
    zs = [complex(z) for z in zs]
    vals = pmap(lambda n: ft_eval(family(n), np.array(zs)), range(1, n_max + 1))
    errs = np.abs(np.array(vals) - 1.0)  # (n_max, len(zs))
    per_z = {}
    ok = True
    for i, z in enumerate(zs):
        status = _trend(errs[:, i], transform_tol)
        per_z[repr(z)] = {"errors": errs[:, i].tolist(), "status": status}
        ok &= status == "pass"
    return SequenceReport(errs[-1].tolist(), bool(ok), transform_tol, {"per_z": per_z})
