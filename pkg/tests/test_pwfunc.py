import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import quad

from shiftspan.errors import GridError, PreconditionError
from shiftspan.pwfunc import (
    Grid,
    add,
    build_indicator,
    build_poly_bump,
    common_step,
    conv_power,
    convolve,
    exp_poly,
    from_function,
    integral,
    l1_norm,
    l2_norm,
    project,
    reflect,
    refine,
    scale,
    shift,
    support_endpoints,
    zero_function,
)

from conftest import indicator, pp_strategy


class TestGrid:
    def test_cells(self):
        g = Grid(0.0, 1.0, 8)
        assert g.h == 0.125
        np.testing.assert_allclose(g.starts(), np.arange(8) / 8)

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 4)
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 0)

    def test_off_grid_point_names_neighbours(self):
        with pytest.raises(GridError, match="0.125"):
            Grid(0.0, 1.0, 8).index_of(0.1)

    def test_common_step(self):
        assert common_step(1 / 8, 181 / 128) == pytest.approx(1 / 128)
        assert common_step(0.5, 0.25) == 0.25


class TestConstructors:
    def test_indicator(self, chi):
        assert l1_norm(chi) == pytest.approx(1.0, abs=1e-15)
        assert chi(0.5) == 1.0 and chi(1.5) == 0.0
        assert chi.is_real

    def test_indicator_off_grid(self):
        with pytest.raises(GridError):
            build_indicator(0.0, 0.3, Grid(0.0, 1.0, 8))
        with pytest.raises(PreconditionError):
            build_indicator(1.0, 0.0, Grid(0.0, 1.0, 8))

    def test_bump(self, bump):
        assert l1_norm(bump) == pytest.approx(16 / 15, rel=1e-14)
        assert bump(0.0) == pytest.approx(1.0)
        assert abs(bump(-1.0)) < 1e-15 and bump(1.0) == 0.0
        t = np.linspace(-1, 1, 41)
        np.testing.assert_allclose(bump(t).real, np.where(abs(t) < 1, (1 - t**2) ** 2, 0), atol=1e-14)

    def test_bump_window_off_grid(self):
        with pytest.raises(GridError):
            build_poly_bump(0.0, 0.3, 2, Grid(-1.0, 1.0, 8))

    def test_from_function_polynomial_exact(self):
        f = from_function(lambda t: 1 + t - 2 * t**3, Grid(-1.0, 1.0, 4), 3)
        t = np.linspace(-1, 0.99, 37)
        np.testing.assert_allclose(f(t).real, 1 + t - 2 * t**3, atol=1e-12)

    def test_exp_poly(self):
        f = exp_poly(-2j * np.pi, Grid(0.0, 1.0, 16))
        t = np.linspace(0, 0.999, 101)
        np.testing.assert_allclose(f(t), np.exp(-2j * np.pi * t), atol=1e-15)
        assert f.error < 1e-14


class TestAlgebra:
    def test_add_cancel(self, chi):
        assert add(chi, scale(chi, -1)).is_zero()

    def test_scale(self, chi):
        assert l1_norm(scale(chi, 2)) == pytest.approx(2.0)

    def test_add_adjacent(self, chi):
        f = add(chi, indicator(1.0, 2.0))
        st = support_endpoints(f)
        assert l1_norm(f) == pytest.approx(2.0) and (st.lam, st.gamma) == (0.0, 2.0)

    def test_add_mixed_steps(self):
        f = add(indicator(0.0, 1.0, 8), indicator(0.0, 181 / 128, 181))
        assert f.h == pytest.approx(1 / 128)
        assert l1_norm(f) == pytest.approx(1 + 181 / 128, rel=1e-14)
        assert f(1.2).real == 1.0 and f(0.5).real == 2.0

    def test_shift(self, chi):
        s = shift(chi, 0.5)
        assert (s.grid.a, s.grid.b) == (0.5, 1.5)
        assert shift(chi, 0.0) is chi

    def test_shift_off_grid(self, chi):
        with pytest.raises(GridError, match="nearest"):
            shift(chi, 0.3)

    def test_reflect(self, chi, bump):
        r = reflect(chi)
        assert (r.grid.a, r.grid.b) == (-1.0, 0.0)
        t = np.linspace(-1, 1, 33)
        np.testing.assert_allclose(reflect(reflect(bump))(t), bump(t), atol=1e-15)

    def test_triangle(self, tri):
        assert l1_norm(tri) == pytest.approx(1.0, abs=1e-14)
        assert tri(1.0).real == pytest.approx(1.0)
        st = support_endpoints(tri)
        assert (st.lam, st.gamma) == (0.0, 2.0)

    def test_convolution_support(self, chi, bump):
        st = support_endpoints(convolve(chi, bump))
        assert (st.lam, st.gamma) == (-1.0, 2.0)

    def test_convolution_against_quadrature(self, bump):
        g = indicator(0.0, 0.5, 4)
        fg = convolve(bump, g)
        for t in (-0.7, 0.1, 0.63, 1.2):
            ref = quad(lambda s: bump(s).real * g(t - s).real, -1, 1, points=[t - 0.5, t], limit=200)[0]
            assert fg(t).real == pytest.approx(ref, abs=1e-12)

    def test_conv_power(self, chi, tri, bump):
        assert conv_power(chi, 1) is chi
        t = np.linspace(0, 2, 17)
        np.testing.assert_allclose(conv_power(chi, 2)(t), tri(t), atol=1e-15)
        assert support_endpoints(conv_power(bump, 3)).gamma == 3.0

    def test_degree_cap_projects(self, bump):
        f = conv_power(bump, 3)  # degree 3*4 + 2 = 14, within cap
        assert f.degree <= 16 and f.error == 0.0
        g = convolve(f, bump)  # degree 19 > cap
        assert g.degree == 16 and 0 < g.error < 1e-6

    def test_mismatched_steps_error(self):
        f = indicator(0.0, 1.0, 3)
        g = indicator(0.0, np.sqrt(2), 1)
        with pytest.raises(GridError):
            convolve(f, g)


class TestNorms:
    def test_l1_complex_against_quadrature(self):
        f = exp_poly(1j * 3.0, Grid(0.0, 1.0, 4), 12)
        f = add(f, scale(indicator(0.0, 1.0, 4), -0.5))
        ref = quad(lambda t: abs(np.exp(3j * t) - 0.5), 0, 1, limit=200, epsabs=1e-14)[0]
        assert l1_norm(f) == pytest.approx(ref, abs=1e-12)

    def test_l1_restricted(self, tri):
        assert l1_norm(tri, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)
        assert l1_norm(tri, lo=1.5) == pytest.approx(0.125, abs=1e-15)

    def test_l2(self, tri):
        assert l2_norm(tri) == pytest.approx(np.sqrt(2 / 3), rel=1e-14)

    def test_zero_support(self):
        st = support_endpoints(zero_function(Grid(0.0, 1.0, 4)))
        assert st.empty and st.lam == np.inf

    def test_support_shifted(self, chi):
        st = support_endpoints(shift(chi, 0.5))
        assert (st.lam, st.gamma) == (0.5, 1.5)


class TestProjection:
    def test_refine_keeps_norm(self, bump):
        assert l1_norm(refine(bump, 2)) == pytest.approx(l1_norm(bump), rel=1e-14)

    def test_project_identity(self, bump):
        g, err = project(bump)
        assert err == 0.0

    def test_project_exponential(self):
        f = exp_poly(-2j * np.pi, Grid(0.0, 1.0, 16))
        g, err = project(f, degree=8)
        assert err < 1e-10
        ref = quad(lambda t: abs(f(t) - g(t)), 0, 1, points=np.arange(1, 16) / 16, limit=400)[0]
        assert err == pytest.approx(ref, rel=1e-2, abs=1e-15)

    def test_project_coarser_grid(self, tri):
        g, err = project(tri, Grid(0.0, 2.0, 2), 1)
        assert err == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(pp_strategy(), pp_strategy())
def test_convolution_is_commutative_and_mass_multiplies(f, g):
    fg, gf = convolve(f, g), convolve(g, f)
    t = np.linspace(fg.grid.a, fg.grid.b, 23)
    scale_ = max(1.0, float(np.max(np.abs(fg(t)))))
    np.testing.assert_allclose(fg(t), gf(t), atol=1e-11 * scale_)
    assert integral(fg) == pytest.approx(integral(f) * integral(g), rel=1e-10, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(pp_strategy(complex_=True))
def test_refine_and_reflect_are_exact(f):
    t = np.linspace(f.grid.a, f.grid.b, 31)[:-1] + 1e-3
    np.testing.assert_allclose(refine(f, 3)(t), f(t), atol=1e-12 * max(1.0, np.abs(f.coeffs).max()))
    np.testing.assert_allclose(reflect(f)(-t), f(t), atol=1e-12 * max(1.0, np.abs(f.coeffs).max()))


@settings(max_examples=30, deadline=None)
@given(pp_strategy())
def test_triangle_inequality_and_support_bounds(f):
    n1 = l1_norm(f)
    assert n1 <= np.sum(np.abs(f.coeffs)) * f.h + 1e-12
    st = support_endpoints(f)
    assert st.lam == f.grid.a and st.gamma == f.grid.b
    assert l1_norm(f, hi=st.lam) + l1_norm(f, lo=st.gamma) <= st.tol


@settings(max_examples=30, deadline=None)
@given(pp_strategy(complex_=True), pp_strategy(complex_=True))
def test_young_inequality(f, g):
    assert l1_norm(convolve(f, g)) <= l1_norm(f) * l1_norm(g) * (1 + 1e-10)


@settings(max_examples=30, deadline=None)
@given(pp_strategy(complex_=True))
def test_shift_and_reflect_preserve_l1(f):
    n = l1_norm(f)
    assert l1_norm(shift(f, 3 * f.h)) == pytest.approx(n, rel=1e-13)
    assert l1_norm(reflect(f)) == pytest.approx(n, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(pp_strategy(complex_=True), pp_strategy(complex_=True))
def test_linearity(f, g):
    a, b = 0.7 - 1.2j, -2.0
    h = add(scale(f, a), scale(g, b))
    t = np.linspace(min(f.grid.a, g.grid.a), max(f.grid.b, g.grid.b), 200)
    ref = a * f(t) + b * g(t)
    np.testing.assert_allclose(h(t), ref, atol=1e-12 * max(1.0, np.abs(ref).max()))
