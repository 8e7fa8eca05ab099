import numpy as np
import pytest

from rieszreg.quadrature import PanelGrid
from rieszreg.rkhs import (
    BoundaryValues,
    Interval,
    boundary_lift,
    kernel_pair_integral,
    reproduce_value,
    reproducing_kernel_second,
    reproducing_kernel_value,
    shift_rhs,
)
from rieszreg.problems import fdem_problem, test_problem_1 as make_tp1, test_problem_2 as make_tp2, truth_profile, FdemConfig

UNIT = Interval(0.0, 1.0)

# Oracle: for iv=[0,1], y=1/2, the kernel value G(1/2, 1/2) is the integral of
# the square of the piecewise-linear profile: 2 * (1/4) * (1/24) = 1/48.
G_HALF_HALF = 1.0 / 48.0


class TestInterval:
    def test_validation(self):
        with pytest.raises(ValueError):
            Interval(1.0, 1.0)
        with pytest.raises(ValueError):
            Interval(2.0, -1.0)

    def test_require(self):
        with pytest.raises(ValueError):
            UNIT.require(1.5)


class TestKernelSecond:
    def test_direct_substitution(self):
        # y=0.5, z=0.25: first branch (z < y): z * (y - 1) = -0.125
        assert reproducing_kernel_second(0.5, 0.25, UNIT) == pytest.approx(-0.125, abs=1e-15)

    @pytest.mark.parametrize("y", [0.0, 1.0])
    def test_boundary_degeneracy(self, y):
        z = np.linspace(0.0, 1.0, 11)
        assert np.all(reproducing_kernel_second(y, z, UNIT) == 0.0)

    def test_continuity_at_kink(self):
        y = 0.37
        eps = 1e-9
        lo = reproducing_kernel_second(y, y - eps, UNIT)
        hi = reproducing_kernel_second(y, y + eps, UNIT)
        assert abs(lo - hi) < 1e-8

    def test_domain_check(self):
        with pytest.raises(ValueError):
            reproducing_kernel_second(1.5, 0.5, UNIT)
        with pytest.raises(ValueError):
            reproducing_kernel_second(0.5, -0.1, UNIT)


class TestKernelValue:
    def test_center_value(self):
        assert reproducing_kernel_value(0.5, 0.5, UNIT) == pytest.approx(G_HALF_HALF, abs=1e-15)

    def test_vanishes_at_endpoint(self):
        for y in (0.2, 0.8):
            assert reproducing_kernel_value(0.0, y, UNIT) == pytest.approx(0.0, abs=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(11)
        for x, y in rng.uniform(0.05, 0.95, size=(5, 2)):
            gxy = reproducing_kernel_value(x, y, UNIT)
            gyx = reproducing_kernel_value(y, x, UNIT)
            assert abs(gxy - gyx) < 1e-14


class TestBoundaryLift:
    def test_zero(self):
        t = np.linspace(0, 1, 7)
        assert np.all(boundary_lift(t, UNIT, BoundaryValues(0.0, 0.0)) == 0.0)

    def test_affine_values(self):
        # f0=1, f1=2 on [0,1] gives t + 1
        bv = BoundaryValues(1.0, 2.0)
        assert boundary_lift(0.5, UNIT, bv) == pytest.approx(1.5, abs=1e-15)
        assert boundary_lift(0.0, UNIT, bv) == 1.0
        assert boundary_lift(1.0, UNIT, bv) == 2.0

    def test_depth_profile_form(self):
        z0, alpha, beta = 4.0, np.exp(-1) + 1, np.exp(-9) + 1
        iv, bv = Interval(0.0, z0), BoundaryValues(alpha, beta)
        z = np.linspace(0, z0, 9)
        expected = (1 - z / z0) * alpha + (z / z0) * beta
        assert np.allclose(boundary_lift(z, iv, bv), expected, atol=1e-15)
        assert boundary_lift(z0, iv, bv) == pytest.approx(beta, abs=1e-15)


class TestReproduceValue:
    def test_zero_second_derivative(self):
        for y in (0.0, 0.3, 1.0):
            assert reproduce_value(lambda z: 0.0 * z, y, UNIT) == 0.0

    def test_parabola(self):
        # f(t) = t(1-t) has f'' = -2 and f(1/2) = 1/4
        val = reproduce_value(lambda z: -2.0 * np.ones_like(z), 0.5, UNIT)
        assert val == pytest.approx(0.25, abs=1e-13)

    @pytest.mark.parametrize("y", [0.0, 1.0])
    def test_endpoints(self, y):
        assert reproduce_value(lambda z: np.exp(z), y, UNIT) == 0.0

    def test_reproduction_identity_polynomials(self):
        # p = (t-a)(t-b) q(t) vanishes at both ends; degree(p) <= 6
        rng = np.random.default_rng(5)
        iv = Interval(-1.0, 2.0)
        for _ in range(4):
            q = np.polynomial.Polynomial(rng.uniform(-1, 1, size=5))
            p = q * np.polynomial.Polynomial([iv.a * iv.b, -(iv.a + iv.b), 1.0])
            p2 = p.deriv(2)
            for y in np.linspace(iv.a, iv.b, 9):
                got = reproduce_value(lambda z: p2(z), y, iv)
                assert abs(got - p(y)) < 1e-10


class TestKernelPairIntegral:
    def test_matches_reproduce_value(self):
        grid = PanelGrid(0.0, 1.0, order=32, panels=4)
        u = np.cos(3 * grid.nodes)
        ys = np.array([0.15, 0.5, 0.85])
        fast = kernel_pair_integral(grid, u, ys)
        slow = [reproduce_value(lambda z: np.cos(3 * z), y, UNIT) for y in ys]
        assert np.allclose(fast, slow, atol=1e-12)

    def test_batched(self):
        grid = PanelGrid(0.0, 1.0, order=16, panels=4)
        U = np.vstack([np.ones_like(grid.nodes), grid.nodes])
        out = kernel_pair_integral(grid, U, np.array([0.5]))
        assert out.shape == (2, 1)


class TestShiftRhs:
    def test_zero_boundary_is_identity(self):
        ps = make_tp2(4)
        g = np.arange(8, dtype=float)
        assert np.array_equal(shift_rhs(ps, g), g)

    def test_shifted_first_block(self):
        # after removing the lift, block 1 data becomes x (log4 - 3/2)
        ps = make_tp1(5)
        phi = shift_rhs(ps, ps.rhs_exact)
        xs = ps.nodes[0]
        assert np.allclose(phi[:5], xs * (np.log(4.0) - 1.5), atol=1e-14)

    def test_length_mismatch(self):
        ps = make_tp1(5)
        with pytest.raises(ValueError):
            shift_rhs(ps, np.zeros(7))

    def test_analytic_vs_quadrature_shift(self):
        from dataclasses import replace

        ps = fdem_problem(FdemConfig(n=6), truth_profile("sigma1"))
        numeric = replace(ps, analytic_shift=None)
        phi_a = shift_rhs(ps, ps.rhs_exact)
        phi_q = shift_rhs(numeric, ps.rhs_exact)
        assert np.max(np.abs(phi_a - phi_q)) < 1e-10

    def test_quadrature_shift_on_affine_solution(self):
        # with rhs generated from the truth, the shifted data must match the
        # forward image of (truth - lift); verified through closed forms
        ps = make_tp1(4)
        from dataclasses import replace

        numeric = replace(ps, analytic_shift=None)
        phi_a = shift_rhs(ps, ps.rhs_exact)
        phi_q = shift_rhs(numeric, ps.rhs_exact)
        assert np.max(np.abs(phi_a - phi_q)) < 1e-12
