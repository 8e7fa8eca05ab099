import numpy as np
import pytest

from rieszreg.gram import assemble_gram, spectral_factorize
from rieszreg.rkhs import shift_rhs
from rieszreg.riesz import build_basis
from rieszreg.solver import (
    DataVector,
    apply_forward,
    coefficients_full,
    coefficients_teig,
    coefficients_teig_pinv,
    evaluate_solution,
    orthonormal_function,
    residual_norm,
    solution_sweep,
    solve_at,
    w_norm,
    w_norm_quadratic,
)
from rieszreg.problems import test_problem_1 as make_tp1, test_problem_2 as make_tp2


def random_spd_fac(k, seed, jitter=0.0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(k, k))
    G = A @ A.T + jitter * np.eye(k)
    G = 0.5 * (G + G.T)
    return spectral_factorize(G), rng


@pytest.fixture(scope="module")
def tp1_ctx():
    ps = make_tp1(5)
    basis = build_basis(ps)
    fac = spectral_factorize(assemble_gram(basis))
    g = shift_rhs(ps, ps.rhs_exact)
    return ps, basis, fac, g


@pytest.fixture(scope="module")
def tp2_ctx():
    ps = make_tp2(10)
    basis = build_basis(ps)
    fac = spectral_factorize(assemble_gram(basis))
    g = shift_rhs(ps, ps.rhs_exact)
    return ps, basis, fac, g


class TestCoefficients:
    def test_identity_matrix(self):
        fac = spectral_factorize(np.eye(4))
        g = np.array([1.0, -2.0, 3.0, 0.5])
        assert np.allclose(coefficients_full(fac, g), g, atol=1e-14)

    def test_zero_data(self):
        fac, _ = random_spd_fac(5, 0, jitter=0.5)
        assert np.all(coefficients_full(fac, np.zeros(5)) == 0.0)

    def test_full_equals_cutoff_truncation(self, tp1_ctx):
        _, _, fac, g = tp1_ctx
        full = coefficients_full(fac, g)
        trunc = coefficients_teig(fac, g, fac.cutoff)
        assert np.max(np.abs(full - trunc)) <= 1e-12 * max(np.max(np.abs(full)), 1.0)

    def test_rank_one(self):
        fac, rng = random_spd_fac(4, 1, jitter=0.5)
        g = rng.normal(size=4)
        c1 = coefficients_teig(fac, g, 1)
        u1 = fac.eigenvectors[:, 0]
        assert np.allclose(c1, (u1 @ g / fac.eigenvalues[0]) * u1, atol=1e-14)

    def test_pinv_form_agrees(self):
        fac, rng = random_spd_fac(6, 2, jitter=0.1)
        g = rng.normal(size=6)
        for kappa in range(1, fac.cutoff + 1):
            a = coefficients_teig(fac, g, kappa)
            b = coefficients_teig_pinv(fac, g, kappa)
            assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(a)), 1.0)

    def test_kappa_range_validation(self):
        fac, _ = random_spd_fac(3, 3, jitter=0.5)
        with pytest.raises(ValueError):
            coefficients_teig(fac, np.ones(3), 0)
        with pytest.raises(ValueError):
            coefficients_teig(fac, np.ones(3), 4)

    def test_accepts_data_vector(self):
        fac, _ = random_spd_fac(3, 4, jitter=0.5)
        g = DataVector(np.ones(3))
        assert np.allclose(coefficients_full(fac, g), coefficients_full(fac, np.ones(3)))


class TestResidualNorm:
    def test_full_rank_zero(self):
        fac, rng = random_spd_fac(5, 5, jitter=0.5)
        g = rng.normal(size=5)
        assert residual_norm(fac, g, 5) == 0.0

    def test_zero_rank_is_data_norm(self):
        fac, rng = random_spd_fac(5, 6, jitter=0.5)
        g = rng.normal(size=5)
        assert residual_norm(fac, g, 0) == pytest.approx(np.linalg.norm(g), rel=1e-14)

    def test_monotone_in_kappa(self):
        fac, rng = random_spd_fac(8, 7, jitter=0.1)
        for _ in range(5):
            g = rng.normal(size=8)
            res = [residual_norm(fac, g, k) for k in range(0, 9)]
            assert all(r1 >= r2 - 1e-15 for r1, r2 in zip(res, res[1:]))

    def test_matches_direct_residual(self):
        fac, rng = random_spd_fac(6, 8, jitter=0.5)
        g = rng.normal(size=6)
        for kappa in (1, 3, 6):
            c = coefficients_teig(fac, g, kappa)
            direct = np.linalg.norm(fac.matrix @ c - g)
            assert abs(residual_norm(fac, g, kappa) - direct) < 1e-10


class TestWNorm:
    def test_zero(self):
        fac, _ = random_spd_fac(4, 9, jitter=0.5)
        assert w_norm(fac, np.zeros(4)) == 0.0

    def test_identity(self):
        fac = spectral_factorize(np.eye(4))
        c = np.array([3.0, 0.0, -4.0, 0.0])
        assert w_norm(fac, c) == pytest.approx(5.0, rel=1e-14)

    def test_monotone_in_kappa(self, tp1_ctx):
        _, _, fac, g = tp1_ctx
        norms = [w_norm(fac, coefficients_teig(fac, g, k)) for k in range(1, fac.cutoff + 1)]
        assert all(a <= b + 1e-12 * max(b, 1.0) for a, b in zip(norms, norms[1:]))

    def test_quadratic_form_agrees(self):
        fac, rng = random_spd_fac(6, 10, jitter=0.5)
        c = rng.normal(size=6)
        a, b = w_norm(fac, c), w_norm_quadratic(fac, c)
        assert abs(a - b) <= 1e-9 * max(a, 1.0)


class TestEvaluateSolution:
    def test_zero_coefficients_give_lift(self, tp1_ctx):
        ps, basis, _, _ = tp1_ctx
        grid = np.linspace(0, 1, 11)
        vals = evaluate_solution(basis, np.zeros(basis.size), grid)
        assert np.allclose(vals, grid + 1.0, atol=1e-14)

    def test_endpoint_values_exact(self, tp1_ctx):
        ps, basis, fac, g = tp1_ctx
        c = coefficients_full(fac, g)
        ends = evaluate_solution(basis, c, np.array([0.0, 1.0]))
        assert ends[0] == pytest.approx(1.0, abs=1e-9)
        assert ends[1] == pytest.approx(2.0, abs=1e-9)

    def test_grid_outside_interval(self, tp1_ctx):
        _, basis, _, _ = tp1_ctx
        with pytest.raises(ValueError):
            evaluate_solution(basis, np.zeros(basis.size), np.array([0.5, 1.5]))

    def test_noise_free_reconstruction_accuracy(self, tp2_ctx):
        ps, basis, fac, g = tp2_ctx
        c = coefficients_full(fac, g)
        grid = np.linspace(0, np.pi, 1000)
        err = np.max(np.abs(evaluate_solution(basis, c, grid) - np.sin(grid)))
        assert err <= 1e-6

    def test_sweep_matches_individual(self, tp1_ctx):
        _, basis, fac, g = tp1_ctx
        grid = np.linspace(0, 1, 50)
        F, C = solution_sweep(fac, basis, g, grid)
        for kappa in (1, 3, fac.cutoff):
            c = coefficients_teig(fac, g, kappa)
            assert np.allclose(C[:, kappa - 1], c, atol=1e-12 * max(1.0, np.max(np.abs(c))))
            assert np.allclose(F[kappa - 1], evaluate_solution(basis, c, grid), atol=1e-9)


class TestOrthonormalFunctions:
    def test_orthonormality_via_gram_algebra(self, tp1_ctx):
        _, _, fac, _ = tp1_ctx
        keep = np.nonzero(fac.eigenvalues >= 1e-8 * fac.eigenvalues[0])[0]
        U = fac.eigenvectors[:, keep]
        M = U.T @ fac.matrix @ U / np.sqrt(
            np.outer(fac.eigenvalues[keep], fac.eigenvalues[keep])
        )
        assert np.max(np.abs(M - np.eye(len(keep)))) < 1e-6

    def test_forward_map_gives_scaled_eigenvector(self, tp1_ctx):
        ps, basis, fac, _ = tp1_ctx
        keep = [ell for ell in range(1, fac.cutoff + 1)
                if fac.eigenvalues[ell - 1] >= 1e-8 * fac.eigenvalues[0]]
        for ell in keep:
            forward = apply_forward(ps, lambda y: orthonormal_function(fac, basis, ell, y))
            expected = np.sqrt(fac.eigenvalues[ell - 1]) * fac.eigenvectors[:, ell - 1]
            assert np.linalg.norm(forward - expected) <= 1e-6

    def test_index_validation(self, tp1_ctx):
        _, basis, fac, _ = tp1_ctx
        with pytest.raises(ValueError):
            orthonormal_function(fac, basis, fac.cutoff + 1, 0.5)


class TestApplyForward:
    def test_zero_function(self, tp1_ctx):
        ps = tp1_ctx[0]
        out = apply_forward(ps, lambda t: 0.0 * t)
        assert np.all(out == 0.0)

    def test_reproduces_registered_data_tp1(self, tp1_ctx):
        ps = tp1_ctx[0]
        out = apply_forward(ps, ps.truth)
        xs = ps.nodes[0]
        assert np.allclose(out[:5], xs * (np.log(4) - 0.5), atol=1e-12)
        assert np.max(np.abs(out - ps.rhs_exact)) < 1e-10

    def test_reproduces_registered_data_tp2(self, tp2_ctx):
        ps = tp2_ctx[0]
        out = apply_forward(ps, np.sin)
        xs = ps.nodes[0]
        assert np.allclose(out[:10], 2 * np.sinh(xs) / xs, atol=1e-11)


class TestRegularizationAlgebra:
    def test_galerkin_orthogonality_at_full_rank(self):
        fac, rng = random_spd_fac(8, 11, jitter=1e-6)
        g = rng.normal(size=8)
        c = coefficients_full(fac, g)
        r = fac.matrix @ c - g
        proj = fac.eigenvectors[:, : fac.cutoff].T @ r
        assert np.max(np.abs(proj)) <= 1e-9 * np.linalg.norm(g)

    def test_truncation_semigroup(self):
        fac, rng = random_spd_fac(7, 12, jitter=0.1)
        g = rng.normal(size=7)
        kappa, smaller = 6, 3
        c_k = coefficients_teig(fac, g, kappa)
        # re-truncate the eigen-expansion of c_k at the smaller rank
        proj = fac.eigenvectors.T @ c_k
        proj[smaller:] = 0.0
        again = fac.eigenvectors @ proj
        direct = coefficients_teig(fac, g, smaller)
        assert np.max(np.abs(again - direct)) <= 1e-13 * max(np.max(np.abs(direct)), 1.0)

    def test_minimal_l_norm_against_brute_force(self):
        # dense oracle: among minimizers of ||G_k c - g||, pick min ||L c||
        for seed in range(6):
            rng = np.random.default_rng(100 + seed)
            k = int(rng.integers(2, 7))
            A = rng.normal(size=(k, k))
            G = A @ A.T + 0.05 * np.eye(k)
            fac = spectral_factorize(0.5 * (G + G.T))
            g = rng.normal(size=k)
            lam, U = fac.eigenvalues, fac.eigenvectors
            L = np.sqrt(lam)[:, None] * U.T
            for kappa in range(1, fac.cutoff + 1):
                Gk = (U[:, :kappa] * lam[:kappa]) @ U[:, :kappa].T
                c0 = np.linalg.pinv(Gk) @ g
                Z = U[:, kappa:]
                if Z.shape[1]:
                    alpha, *_ = np.linalg.lstsq(L @ Z, -L @ c0, rcond=None)
                    oracle = c0 + Z @ alpha
                else:
                    oracle = c0
                mine = coefficients_teig(fac, g, kappa)
                scale = max(np.max(np.abs(oracle)), 1.0)
                assert np.max(np.abs(oracle - mine)) <= 1e-10 * scale


class TestSolveAt:
    def test_bundle_consistency(self):
        ps = make_tp1(3)
        basis = build_basis(ps)
        fac = spectral_factorize(assemble_gram(basis))
        g = shift_rhs(ps, ps.rhs_exact)
        sol = solve_at(fac, basis, g, 2)
        assert sol.kappa == 2
        assert sol.residual == pytest.approx(residual_norm(fac, g, 2), rel=1e-14)
        assert sol.w_norm == pytest.approx(w_norm(fac, sol.coeffs), rel=1e-14)
        d = sol.to_dict(grid=np.linspace(0, 1, 5))
        assert set(d) == {"kappa", "coeffs", "w_norm", "residual", "grid", "values"}

    def test_label_validation(self):
        with pytest.raises(ValueError):
            DataVector(np.ones(3), label="weird")
