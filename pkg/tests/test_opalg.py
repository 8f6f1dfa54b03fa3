import numpy as np
import pytest
from hypothesis import given, settings

from shiftspan.errors import PreconditionError
from shiftspan.fourier import ft_eval, zero_search
from shiftspan.opalg import (
    OperatorQuotient,
    convolve_e_alpha,
    example_construction,
    example_generators,
    op_support,
    remove_zero,
    titchmarsh_report,
)
from shiftspan.pwfunc import convolve, l1_norm, scale, shift, support_endpoints

from conftest import TWO_PI, chi_hat, indicator, pp_strategy


class TestRemoveZero:
    def test_indicator_matches_closed_form(self, chi):
        psi, info = remove_zero(chi, TWO_PI, 1, return_info=True)
        t = np.linspace(0, 0.999, 200)
        np.testing.assert_allclose(psi(t), -(1 - np.exp(-1j * TWO_PI * t)) / TWO_PI, atol=1e-14)
        assert ft_eval(psi, 0.0) == pytest.approx(-1 / TWO_PI, abs=1e-14)
        assert info.tail_mass < 1e-12
        assert psi(1.5) == 0

    def test_division_identity(self, chi):
        psi = remove_zero(chi, TWO_PI, 1)
        z = np.random.default_rng(1).uniform(-20, 20, 50) + 1j * np.random.default_rng(2).uniform(-2, 2, 50)
        np.testing.assert_allclose((z - TWO_PI) * ft_eval(psi, z), chi_hat(z), atol=1e-12)

    def test_triangle_double(self, tri):
        psi = remove_zero(tri, TWO_PI, 2)
        assert ft_eval(psi, 0.0) == pytest.approx(1 / TWO_PI**2, abs=1e-14)
        st = support_endpoints(psi)
        assert st.lam >= 0 and st.gamma <= 2

    def test_order_too_high(self, tri):
        with pytest.raises(PreconditionError, match="not a zero of required order"):
            remove_zero(tri, TWO_PI, 3)

    def test_not_a_zero(self, chi):
        with pytest.raises(PreconditionError):
            remove_zero(chi, np.pi, 1)

    def test_complex_zero(self):
        f = convolve(indicator(0.0, 1.0), indicator(0.0, 0.5, 4)) + indicator(0.0, 0.25, 2) * 0.3
        z0 = [r.z for r in zero_search(f, [-12, 12, -4, 4]).zeros if r.z.real > 9][0]
        psi = remove_zero(f, z0, 1)
        z = np.array([0.0, 1 + 1j, -3.0, 7 - 2j])
        np.testing.assert_allclose((z - z0) * ft_eval(psi, z), ft_eval(f, z), atol=1e-11)
        assert support_endpoints(psi).gamma <= f.grid.b


class TestConvolveEAlpha:
    def test_ramp(self, chi):
        g = convolve_e_alpha(chi, 0.0, 3.0)
        assert g(0.5).real == pytest.approx(0.5) and g(2.5).real == pytest.approx(1.0)
        assert g.grid.b == 3.0

    def test_decay(self, chi):
        g = convolve_e_alpha(chi, -1.0, 2.0)
        assert g(0.999999).real == pytest.approx(1 - np.exp(-1), abs=1e-6)
        assert g(1.5).real == pytest.approx((1 - np.exp(-1)) * np.exp(-0.5), abs=1e-14)

    def test_cross_check_with_remove_zero(self, chi):
        a = remove_zero(chi, TWO_PI, 1)
        b = scale(convolve_e_alpha(chi, -1j * TWO_PI, 1.0), -1j)
        assert l1_norm(a - b) < 1e-14


class TestOperators:
    def test_supports(self, chi, tri):
        assert op_support(OperatorQuotient(tri, chi)) == (0.0, 1.0)
        assert op_support(OperatorQuotient(chi, chi)) == (0.0, 0.0)
        assert op_support(OperatorQuotient(shift(chi, 2.0), chi)) == (2.0, 2.0)

    def test_zero_denominator(self, chi):
        with pytest.raises(PreconditionError):
            OperatorQuotient(chi, chi - chi)

    def test_equality(self, chi, tri):
        q1 = OperatorQuotient(tri, chi)
        q2 = OperatorQuotient(convolve(tri, tri), convolve(chi, tri))
        assert q1.equals(q2)
        assert not q1.equals(OperatorQuotient(chi, chi))


class TestTitchmarsh:
    def test_trivial(self, chi):
        r = titchmarsh_report(chi, chi)
        assert (r.dev_lambda, r.dev_gamma) == (0.0, 0.0)

    def test_shifted_bump(self, chi, bump):
        r = titchmarsh_report(shift(bump, 3.0), chi)
        assert r.passed


@settings(max_examples=30, deadline=None)
@given(pp_strategy(n_max=16, complex_=True), pp_strategy(n_max=16))
def test_titchmarsh_property(f, g):
    assert titchmarsh_report(f, g).passed


class TestExample:
    def test_generators(self, bump):
        ex = example_construction(bump, 2, [1, 14, -1, 1])
        base = [(r.z, r.mult) for r in ex.base_atlas.zeros]
        z1, z2 = ex.removed[0][0], ex.removed[1][0]
        a1 = zero_search(ex.generators[0], [1, 14, -1, 1])
        a2 = zero_search(ex.generators[1], [1, 14, -1, 1])
        want1 = [(z, m) for z, m in base if abs(z - z1) > 1e-6]
        want2 = [(z, 2 * m) for z, m in base if abs(z - z2) > 1e-6]
        for got, want in ((a1, want1), (a2, want2)):
            assert len(got.zeros) == len(want)
            for r, (z, m) in zip(got.zeros, want):
                assert abs(r.z - z) < 1e-6 and r.mult == m

    def test_too_few_zeros(self, bump):
        with pytest.raises(PreconditionError):
            example_generators(bump, 3, [1, 9, -1, 1])


@settings(max_examples=20, deadline=None)
@given(pp_strategy(n_max=12, complex_=True))
def test_translation_operator_support(f):
    lam = 5 * f.h
    lo, hi = op_support(OperatorQuotient(shift(f, lam), f))
    assert abs(lo - lam) <= f.h and abs(hi - lam) <= f.h


@settings(max_examples=20, deadline=None)
@given(pp_strategy(n_max=8))
def test_running_integral_derivative(f):
    g = convolve_e_alpha(f, 0.0, f.grid.b + 1.0)
    t = f.grid.starts() + 0.5 * f.h
    d = 1e-6 * f.h
    fd = (g(t + d) - g(t - d)) / (2 * d)
    np.testing.assert_allclose(fd, f(t), atol=1e-6 * max(1.0, np.abs(f.coeffs).max()))


def test_division_identity_random_points(tri):
    psi = remove_zero(tri, TWO_PI, 2)
    rng = np.random.default_rng(3)
    z = rng.uniform(0.5, 20, 100) + 1j * rng.uniform(-1, 1, 100)
    F = ft_eval(tri, z)
    assert np.all(np.abs(ft_eval(psi, z) * (z - TWO_PI) ** 2 - F) <= 1e-8 * (1 + np.abs(F)))
