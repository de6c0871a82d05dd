import json
import math

import numpy as np
import pytest
from scipy import sparse as scipy_sparse

from oblivious_perturbation.src.common.common_errors import InvalidArgumentError, MatrixFileError
from oblivious_perturbation.src.rng.rng_bit_source import BitSource
from oblivious_perturbation.src.pattern.pattern_matrix import build_pattern
from oblivious_perturbation.src.perturb.perturb_settings import PerturbationSettings, theory_rule_parameters
from oblivious_perturbation.src.perturb.perturb_dense import build_r1
from oblivious_perturbation.src.perturb.perturb_sparse import SparsePerturbation, build_r2, heavy_row_bound
from oblivious_perturbation.src.perturb.perturb_oblivious import build_perturbation, gaussian_perturbation
from oblivious_perturbation.src.perturb.perturb_storage import load_perturbation, save_perturbation
from oblivious_perturbation.src.spectra.spectra_oracle import spectral_norm

class TestDensePart:
    def test_uses_two_n_bits(self):
        pattern = build_pattern(32, BitSource(0))
        src = BitSource(1)
        build_r1(32, pattern, src)
        assert src.bits_consumed == 64

    def test_dense_matches_apply(self, rng):
        r1 = build_r1(16, build_pattern(16, BitSource(0)), BitSource(1))
        dense = r1.to_dense()
        x = rng.standard_normal(16)
        assert np.allclose(r1.apply(x), dense @ x)
        assert np.allclose(r1.apply_transpose(x), dense.T @ x)
        assert np.allclose(np.abs(dense), 1.0 / (3.0 * 4.0))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            build_r1(8, build_pattern(16, BitSource(0)), BitSource(1))

class TestSparsePart:
    def test_structure(self):
        sparse = build_r2(50, 8, 44, BitSource(3))
        dense = sparse.to_dense()
        assert sparse.subsets.shape == (50, 8)
        assert np.all(np.diff(sparse.subsets, axis=1) > 0)
        assert np.all(np.count_nonzero(dense, axis=0) <= 8)
        assert set(np.unique(np.abs(dense)).tolist()) <= {0.0, 1.0 / 44}

    def test_apply_matches_dense(self, rng):
        sparse = build_r2(30, 4, 11, BitSource(4))
        x = rng.standard_normal(30)
        assert np.allclose(sparse.apply(x), sparse.to_dense() @ x)
        assert np.allclose(sparse.apply_transpose(x), sparse.to_dense().T @ x)

    def test_heavy_row_is_trimmed(self):
        n, k, l = 6, 2, 3
        subsets = [[1, 2], [1, 3], [1, 4], [1, 5], [2, 6], [3, 6]]
        sparse = SparsePerturbation.from_columns(n, k, l, subsets)
        assert sparse.heavy_mask.tolist() == [True, False, False, False, False, False]
        dense = sparse.to_dense()
        assert not dense[0].any()
        assert dense[1, 0] == pytest.approx(1.0 / 3)
        assert sparse.heavy_row_stats().trimmed == 1

    def test_worked_example_zeroes_first_row(self):
        n, k, l = 8, 2, 3
        subsets = [[1, 5], [1, 6], [1, 7], [1, 8], [2, 5], [3, 6], [4, 7], [2, 8]]
        sparse = SparsePerturbation.from_columns(n, k, l, subsets)
        assert sparse.heavy_mask.tolist() == [True] + [False] * 7
        expected = np.zeros((n, n))
        for column, subset in enumerate(subsets):
            for row in subset:
                if row != 1:
                    expected[row - 1, column] = 1.0 / l
        assert np.array_equal(sparse.to_dense(), expected)
        assert sparse.matrix.nnz == n * k - 4
        stats = sparse.heavy_row_stats()
        assert stats.trimmed == 1
        assert stats.bound == pytest.approx(8 * math.exp(-2) * (2 * math.e / 3) ** 3)

    def test_stored_as_compressed_columns(self):
        sparse = build_r2(40, 4, 11, BitSource(8))
        assert isinstance(sparse.matrix, scipy_sparse.csc_matrix)
        assert sparse.matrix.shape == (40, 40)
        assert sparse.matrix.nnz <= 40 * 4
        assert np.all(np.diff(sparse.matrix.indptr) <= 4)

    def test_row_at_threshold_is_kept(self):
        sparse = SparsePerturbation.from_columns(4, 1, 2, [[1], [1], [2], [3]])
        assert not sparse.heavy_mask.any()

    def test_schur_bound(self):
        sparse = build_r2(200, 8, 44, BitSource(5))
        assert spectral_norm(sparse.to_dense(), method="lapack") <= math.sqrt(8 / 44) + 1e-12

    def test_bit_report(self):
        src = BitSource(6)
        sparse = build_r2(64, 8, 44, src)
        report = sparse.bit_report
        assert report["sparse_signs"] == 64 * 8
        assert report["sparse_subsets"] + report["sparse_signs"] == src.bits_consumed

    def test_rejects_bad_sizes(self):
        with pytest.raises(InvalidArgumentError):
            build_r2(10, 5, 5, BitSource(0))
        with pytest.raises(InvalidArgumentError):
            build_r2(4, 5, 20, BitSource(0))
        with pytest.raises(InvalidArgumentError):
            SparsePerturbation.from_columns(4, 2, 5, [[1, 1], [1, 2], [2, 3], [3, 4]])

    def test_heavy_row_bound(self):
        assert heavy_row_bound(1000, 8, 44) < 1e-10
        assert heavy_row_bound(200, 8, 12) > 10.0

    def test_heavy_rows_rare_with_defaults(self):
        assert build_r2(1000, 8, 44, BitSource(7)).heavy_row_stats().trimmed == 0

    @pytest.mark.parametrize("n, k, l, trials", [(64, 4, 6, 200), pytest.param(200, 4, 7, 1000, marks=pytest.mark.slow)])
    def test_heavy_row_mean_within_bound(self, n, k, l, trials):
        src = BitSource(12)
        counts = [build_r2(n, k, l, src).heavy_row_stats().proof_variant for _ in range(trials)]
        assert np.mean(counts) <= 1.1 * heavy_row_bound(n, k, l)

class TestSettings:
    def test_defaults(self):
        assert PerturbationSettings().sparse_sizes(0.1) == (8, 44)

    def test_theory_rule(self):
        assert theory_rule_parameters(0.5, 0.5, 1.0) == (32, 174)
        settings = PerturbationSettings(alpha=0.5, theory_rule=True)
        assert settings.sparse_sizes(0.5) == (32, 174)

    def test_explicit_sizes_override_rule(self):
        assert PerturbationSettings(k=4, l=20, theory_rule=True).sparse_sizes(0.5) == (4, 20)

    def test_smaller_delta_needs_more_bits(self):
        settings = PerturbationSettings(alpha=0.5, theory_rule=True, theory_constant=0.01)
        loose = build_perturbation(64, 0.1, 0.5, settings, BitSource(1))
        tight = build_perturbation(64, 0.1, 0.1, settings, BitSource(1))
        assert loose.r2.k == 1 and tight.r2.k > loose.r2.k
        assert tight.bits_total > loose.bits_total

    def test_unknown_key(self):
        with pytest.raises(InvalidArgumentError):
            PerturbationSettings.from_dict({"kappa": 1.0})

    @pytest.mark.parametrize("values", [{"alpha": 0.0}, {"rho": -1.0}, {"gamma": 2.0}, {"theory_constant": 0.0}])
    def test_invalid(self, values):
        with pytest.raises(InvalidArgumentError):
            PerturbationSettings(**values)

class TestObliviousPerturbation:
    def test_bits_add_up(self):
        src = BitSource(2)
        perturbation = build_perturbation(64, 0.1, 0.1, None, src)
        report = perturbation.bit_report
        assert report["total"] == src.bits_consumed == perturbation.bits_total
        assert report["dense_signs"] == 128
        assert report["pattern_v2"] == report["pattern_v3"] == 1536

    def test_norm_at_most_one(self):
        perturbation = build_perturbation(128, 0.1, 0.1, None, BitSource(3))
        assert spectral_norm(perturbation.to_dense(), method="lapack") <= 1.0

    def test_apply_matches_dense(self, rng):
        perturbation = build_perturbation(24, 0.1, 0.1, None, BitSource(4))
        x = rng.standard_normal(24)
        dense = perturbation.to_dense()
        assert np.allclose(perturbation.apply(x), dense @ x)
        assert np.allclose(perturbation.as_operator().transpose().apply(x), dense.T @ x)

    def test_k_clamped_to_n(self):
        perturbation = build_perturbation(4, 0.1, 0.1, None, BitSource(0))
        assert perturbation.r2.k == 4

    def test_k_not_below_l(self):
        with pytest.raises(InvalidArgumentError):
            build_perturbation(16, 0.1, 0.1, PerturbationSettings(k=10, l=10), BitSource(0))

    @pytest.mark.parametrize("eps, delta", [(0.0, 0.1), (1.0, 0.1), (0.1, 0.0), (0.1, 1.0)])
    def test_parameter_ranges(self, eps, delta):
        with pytest.raises(InvalidArgumentError):
            build_perturbation(8, eps, delta, None, BitSource(0))

    def test_summary(self):
        summary = build_perturbation(32, 0.1, 0.1, None, BitSource(5)).summary()
        assert (summary["K"], summary["L"]) == (8, 44)
        assert summary["bits_total"] == sum(summary["bits_by_component"].values())

    def test_bit_budget_scales_like_n_log_n(self):
        ratios = []
        for n in (64, 256, 1024):
            bits = build_perturbation(n, 0.1, 0.1, None, BitSource(n)).bits_total
            ratios.append(bits / (n * math.log2(n)))
        assert max(ratios) / min(ratios) <= 1.5

    def test_gaussian_baseline(self):
        matrix = gaussian_perturbation(64, BitSource(1))
        assert matrix.shape == (64, 64)
        assert spectral_norm(matrix, method="lapack") < 1.5

class TestStorage:
    def test_round_trip(self, tmp_path):
        perturbation = build_perturbation(20, 0.2, 0.1, PerturbationSettings(k=3, l=9), BitSource(8))
        path = tmp_path / "r.json"
        size = save_perturbation(perturbation, path)
        assert size == path.stat().st_size
        loaded = load_perturbation(path)
        assert np.array_equal(loaded.to_dense(), perturbation.to_dense())
        assert loaded.bit_report == perturbation.bit_report
        assert (loaded.eps, loaded.delta) == (0.2, 0.1)
        assert loaded.settings.to_dict() == perturbation.settings.to_dict()

    def test_missing_directory(self, tmp_path):
        perturbation = build_perturbation(8, 0.1, 0.1, None, BitSource(0))
        with pytest.raises(MatrixFileError):
            save_perturbation(perturbation, tmp_path / "missing" / "r.json")
        assert not (tmp_path / "missing").exists()

    def test_missing_file(self, tmp_path):
        with pytest.raises(MatrixFileError):
            load_perturbation(tmp_path / "absent.json")

    def test_not_json(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(MatrixFileError):
            load_perturbation(path)

    def test_wrong_format(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"format": "other", "version": 1}), encoding="utf-8")
        with pytest.raises(MatrixFileError):
            load_perturbation(path)

    def test_tampered_heavy_mask(self, tmp_path):
        path = tmp_path / "r.json"
        save_perturbation(build_perturbation(8, 0.1, 0.1, PerturbationSettings(k=2, l=6), BitSource(1)), path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["sparse"]["heavy_mask"] = "1" * 8
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(MatrixFileError):
            load_perturbation(path)
