import numpy as np
import pytest

from rieszreg.errors import DegenerateProblemError
from rieszreg.gram import assemble_gram, positivity_cutoff, spectral_factorize
from rieszreg.quadrature import IntegrationConfig, integrate
from rieszreg.rkhs import BoundaryValues, Interval
from rieszreg.riesz import ProblemSpec, build_basis
from rieszreg.problems import FdemConfig, fdem_problem, test_problem_1 as make_tp1, test_problem_2 as make_tp2, truth_profile


@pytest.fixture(scope="module")
def tp1_fac():
    basis = build_basis(make_tp1(5))
    G = assemble_gram(basis)
    return basis, G, spectral_factorize(G)


class TestAssembleGram:
    def test_single_functional_diagonal_positive(self):
        ps = ProblemSpec(
            iv=Interval(0.0, 1.0),
            bv=BoundaryValues(0.0, 0.0),
            kernels=(lambda x, t: x / (t + 1.0),),
            nodes=(np.array([0.5]),),
        )
        basis = build_basis(ps)
        G = assemble_gram(basis)
        assert G.shape == (1, 1)
        assert G[0, 0] > 0

    def test_exact_symmetry_as_stored(self, tp1_fac):
        _, G, _ = tp1_fac
        assert np.array_equal(G, G.T)

    def test_cross_block_entries_match_direct_inner_products(self, tp1_fac):
        basis, G, _ = tp1_fac
        # block (1,2) entries are inner products of eq-1 and eq-2 representers
        for p, q in [(1, 6), (2, 9), (5, 10)]:
            direct = integrate(
                lambda z: basis.eval_second(p, z) * basis.eval_second(q, z), 0.0, 1.0
            )
            assert abs(G[p - 1, q - 1] - direct) < 1e-12

    def test_condition_estimate_large(self):
        basis = build_basis(make_tp1(10))
        fac = spectral_factorize(assemble_gram(basis))
        assert fac.cond_estimate >= 1e15

    def test_refinement_stability(self):
        # same entries within 1e-10 (matrix scale) at orders 64 and 128
        ps = make_tp2(4)
        G64 = assemble_gram(build_basis(ps, IntegrationConfig(order=64)))
        G128 = assemble_gram(build_basis(ps, IntegrationConfig(order=128)))
        scale = np.max(np.abs(G64))
        assert np.max(np.abs(G64 - G128)) <= 1e-10 * scale

    @pytest.mark.parametrize(
        "make",
        [
            lambda: make_tp1(5),
            lambda: make_tp2(5),
            lambda: fdem_problem(FdemConfig(n=5), truth_profile("sigma1")),
        ],
    )
    def test_positive_semidefinite_up_to_roundoff(self, make):
        fac = spectral_factorize(assemble_gram(build_basis(make())))
        assert fac.eigenvalues[-1] >= -1e-10 * fac.eigenvalues[0]

    @pytest.mark.parametrize(
        "make",
        [
            lambda: make_tp1(5),
            lambda: make_tp2(5),
            lambda: fdem_problem(FdemConfig(n=5), truth_profile("sigma1")),
        ],
    )
    def test_severe_eigenvalue_decay(self, make):
        fac = spectral_factorize(assemble_gram(build_basis(make())))
        assert fac.eigenvalues[9] <= 1e-8 * fac.eigenvalues[0]


class TestSpectralFactorize:
    def test_identity(self):
        fac = spectral_factorize(np.eye(3))
        assert np.allclose(fac.eigenvalues, 1.0)
        assert fac.cutoff == 3

    def test_diagonal_with_negative_tail(self):
        fac = spectral_factorize(np.diag([3.0, 2.0, -1.0]))
        assert np.allclose(fac.eigenvalues, [3.0, 2.0, -1.0])
        assert fac.cutoff == 2
        assert fac.negative_tail
        assert fac.cond_estimate == pytest.approx(3.0)

    def test_reconstruction(self, tp1_fac):
        _, G, fac = tp1_fac
        R = (fac.eigenvectors * fac.eigenvalues) @ fac.eigenvectors.T
        assert np.linalg.norm(R - G) <= 1e-12 * np.linalg.norm(G)

    def test_sign_convention(self, tp1_fac):
        _, _, fac = tp1_fac
        for col in fac.eigenvectors.T:
            assert col[np.argmax(np.abs(col))] > 0

    def test_determinism(self):
        G = assemble_gram(build_basis(make_tp1(5)))
        f1 = spectral_factorize(G)
        f2 = spectral_factorize(G)
        assert np.array_equal(f1.eigenvalues, f2.eigenvalues)
        assert np.array_equal(f1.eigenvectors, f2.eigenvectors)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            spectral_factorize(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            spectral_factorize(np.array([[np.inf, 0.0], [0.0, 1.0]]))


class TestPositivityCutoff:
    def test_all_positive(self):
        assert positivity_cutoff([3.0, 2.0, 1.0]) == 3

    def test_sign_rule(self):
        assert positivity_cutoff([1.0, 1e-20, -1e-18]) == 2

    def test_relative_policy(self):
        assert positivity_cutoff([1.0, 1e-20, -1e-18], rel_threshold=1e-12) == 1

    def test_degenerate(self):
        with pytest.raises(DegenerateProblemError):
            positivity_cutoff([-1.0, -2.0])
        with pytest.raises(DegenerateProblemError):
            positivity_cutoff([])
