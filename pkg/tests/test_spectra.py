import numpy as np
import pytest

from oblivious_perturbation.src.common.common_errors import CapabilityError, InvalidArgumentError
from oblivious_perturbation.src.common.common_settings import Settings
from oblivious_perturbation.src.rng.rng_bit_source import BitSource
from oblivious_perturbation.src.operator.operator_linear import exact_from_dense
from oblivious_perturbation.src.pattern.pattern_matrix import build_pattern
from oblivious_perturbation.src.perturb.perturb_oblivious import build_perturbation
from oblivious_perturbation.src.spectra.spectra_oracle import (
    jacobi_svd, lapack_svd, materialize, null_vector, round_robin, spectral_norm, svd_small)
from oblivious_perturbation.src.spectra.spectra_cofactor import cofactor_normal
from oblivious_perturbation.src.spectra.spectra_adversarial import (
    adversarial_suite, jordan_matrix, dense_trap_matrix, near_singular_matrix, rank_one_matrix)

class TestOracle:
    def test_materialize(self, rng):
        matrix = rng.standard_normal((5, 7))
        assert np.array_equal(materialize(exact_from_dense(matrix)), matrix)

    def test_materialize_cap(self):
        with pytest.raises(CapabilityError):
            materialize(exact_from_dense(np.eye(8)), cap=4)

    @pytest.mark.parametrize("shape", [(20, 20), (7, 5), (9, 9)])
    def test_jacobi_matches_numpy(self, rng, shape):
        matrix = rng.standard_normal(shape)
        report = jacobi_svd(matrix)
        expected = np.linalg.svd(matrix, compute_uv=False)
        assert np.allclose(report.singular_values[:expected.size], expected, rtol=1e-10, atol=1e-12)
        assert report.residual < 1e-12

    def test_jacobi_matches_lapack(self, rng):
        matrix = rng.standard_normal((16, 16))
        assert np.allclose(svd_small(matrix).singular_values, svd_small(matrix, method="lapack").singular_values)
        assert lapack_svd(matrix).method == "lapack"

    def test_right_vectors(self, rng):
        matrix = rng.standard_normal((10, 10))
        report = svd_small(matrix)
        assert np.allclose(matrix @ report.right_vectors, report.left_vectors * report.singular_values)

    def test_singular_matrix(self):
        report = svd_small(rank_one_matrix(6))
        assert report.s_1 == pytest.approx(1.0)
        assert report.s_n == 0.0
        assert report.kappa == float("inf")
        assert report.to_dict()["kappa"] == "inf"

    @pytest.mark.parametrize("s_n, infinite", [(0.0, True), (1e-20, True), (4e-16, True), (1e-10, False)])
    def test_kappa_at_precision_floor(self, s_n, infinite):
        report = svd_small(np.diag([1.0, 1.0, s_n]), method="lapack")
        assert report.s_n == pytest.approx(s_n, abs=1e-30)
        assert np.isinf(report.kappa) == infinite
        if not infinite:
            assert report.kappa == pytest.approx(1.0 / s_n)

    def test_zero_matrix(self):
        report = svd_small(np.zeros((4, 4)))
        assert not report.singular_values.any()
        assert report.sweeps == 0

    def test_round_robin_covers_pairs(self):
        pairs = set()
        for p, q in round_robin(8):
            assert len(set(p) | set(q)) == 8
            pairs |= {tuple(sorted((int(a), int(b)))) for a, b in zip(p, q)}
        assert len(pairs) == 28

    def test_rejections(self):
        with pytest.raises(InvalidArgumentError):
            svd_small(np.array([[1.0, np.inf], [0.0, 1.0]]))
        with pytest.raises(InvalidArgumentError):
            svd_small(np.eye(3), method="qr")
        with pytest.raises(InvalidArgumentError):
            svd_small(np.ones(3))

    def test_oracle_cap_setting(self):
        Settings.set_oracle_cap(8)
        with pytest.raises(CapabilityError):
            svd_small(np.eye(9))

    def test_null_vector(self, rng):
        columns = rng.standard_normal((20, 19))
        u = null_vector(columns)
        assert np.linalg.norm(u) == pytest.approx(1.0)
        assert np.allclose(columns.T @ u, 0.0, atol=1e-12)

    def test_null_vector_shape(self):
        with pytest.raises(InvalidArgumentError):
            null_vector(np.ones((4, 2)))

class TestCofactor:
    def test_orthogonal(self, rng):
        columns = rng.standard_normal((6, 5))
        zeta = cofactor_normal(columns)
        assert np.allclose(columns.T @ zeta, 0.0, atol=1e-12)
        assert np.linalg.norm(zeta) > 0.0

    def test_matches_null_vector(self, rng):
        columns = rng.standard_normal((7, 6))
        zeta = cofactor_normal(columns)
        u = null_vector(columns)
        assert abs(zeta @ u) == pytest.approx(np.linalg.norm(zeta))

    def test_determinant_identity(self, rng):
        matrix = rng.standard_normal((5, 5))
        assert matrix[:, 0] @ cofactor_normal(matrix[:, 1:]) == pytest.approx(np.linalg.det(matrix))

    def test_rank_deficient(self):
        columns = np.ones((4, 3))
        assert np.allclose(cofactor_normal(columns), 0.0)

    def test_limits(self):
        with pytest.raises(InvalidArgumentError):
            cofactor_normal(np.ones((13, 12)))
        with pytest.raises(InvalidArgumentError):
            cofactor_normal(np.ones((4, 4)))

class TestAdversarial:
    def test_suite_has_unit_norms(self):
        for seed in range(10):
            v_hat = build_pattern(8, BitSource(seed)).to_dense() / (3.0 * np.sqrt(8))
            suite = adversarial_suite(8, v_hat)
            if len(suite) == 4:
                break
        assert suite[-1].critical_eps is not None
        assert [item.name for item in suite] == ["rank_one", "jordan", "near_singular", "dense_trap"]
        for item in suite:
            assert spectral_norm(item.matrix) == pytest.approx(1.0)

    def test_suite_cap(self):
        Settings.set_oracle_cap(4)
        with pytest.raises(CapabilityError):
            adversarial_suite(8)

    def test_jordan_is_nearly_singular(self):
        assert svd_small(jordan_matrix(64)).s_n <= 2.0 ** -16

    def test_near_singular(self):
        report = svd_small(near_singular_matrix(12, BitSource(2)), method="lapack")
        assert report.s_1 == pytest.approx(1.0)
        assert report.s_n < 1e-12

    def test_dense_trap_matrix_defeats_disagreeing_signs(self):
        n = 8
        checked = 0
        for seed in range(20):
            v_hat = build_pattern(n, BitSource(seed)).to_dense() / (3.0 * np.sqrt(n))
            matrix = dense_trap_matrix(v_hat)
            if not matrix.any():
                continue
            j = int(np.flatnonzero(matrix[:, 0])[0])
            signs = BitSource(100 + seed)
            for _ in range(4):
                d1 = signs.next_signs(n).astype(np.float64)
                d2 = signs.next_signs(n).astype(np.float64)
                perturbed = matrix + d1[:, None] * v_hat * d2[None, :] / np.sqrt(n)
                report = svd_small(perturbed, method="lapack")
                assert (report.s_n < 1e-9 * report.s_1) == (d1[j] != d2[0])
                checked += 1
        assert checked >= 40

    def test_dense_trap_matrix_large_n(self, rng):
        v_hat = rng.standard_normal((16, 16))
        matrix = dense_trap_matrix(v_hat)
        assert np.count_nonzero(matrix) == 1
        assert np.count_nonzero(matrix[:, 1:]) == 0

    def test_kappa_falls_as_eps_grows(self):
        n = 32
        r = build_perturbation(n, 0.1, 0.1, None, BitSource(3)).to_dense()
        kappas = [svd_small(rank_one_matrix(n) + eps * r, method="lapack").kappa for eps in (0.05, 0.1, 0.2, 0.4)]
        assert all(later < earlier for earlier, later in zip(kappas, kappas[1:]))
