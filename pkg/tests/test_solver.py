import math
import tracemalloc

import numpy as np
import pytest

from oblivious_perturbation.src.common.common_errors import ConvergenceError, InvalidArgumentError
from oblivious_perturbation.src.common.common_settings import Settings
from oblivious_perturbation.src.rng.rng_bit_source import BitSource
from oblivious_perturbation.src.operator.operator_linear import LinearOperator, count_queries, exact_from_dense
from oblivious_perturbation.src.solver.solver_cg import cg_normal_equations
from oblivious_perturbation.src.solver.solver_norm import (
    candidate_ladder, default_power_steps, estimate_norm, hutchinson_norm)
from oblivious_perturbation.src.solver.solver_settings import SolveConfig
from oblivious_perturbation.src.solver.solver_backward import (
    backward_error, cg_iteration_budget, higham_correction, iteration_bounds, shift_threshold, solve_backward)
from oblivious_perturbation.src.spectra.spectra_adversarial import rank_one_matrix

def setup_queries(n : int, probes : int = 4) -> int:
    """Returns the queries estimate_norm spends with default steps"""
    return probes + len(candidate_ladder(1.0, n)) * (2 * default_power_steps(n) + 1)

def solve_setup_queries(n : int, probes : int = 4) -> int:
    """Returns the queries solve_backward spends before CG, the shift estimate included"""
    return setup_queries(n, probes) + probes

class _ZeroGenerator:
    def standard_normal(self, size):
        return np.zeros(size)

class TestConjugateGradient:
    def test_identity(self):
        result = cg_normal_equations(exact_from_dense(np.eye(5)), np.arange(1.0, 6.0), 1e-12, 10)
        assert result.converged
        assert result.iterations == 1
        assert np.allclose(result.x, np.arange(1.0, 6.0))

    def test_diagonal(self):
        d = np.arange(1.0, 11.0)
        v = np.ones(10)
        result = cg_normal_equations(exact_from_dense(np.diag(d)), v, 1e-10, 20)
        assert result.converged
        assert result.iterations <= 10
        assert np.allclose(result.x, v / d)

    @pytest.mark.parametrize("size", [1, 5, 10])
    def test_stops_on_first_small_residual(self, rng, size):
        op = exact_from_dense(np.diag(np.arange(1.0, size + 1.0)))
        tol = 1e-8
        result = cg_normal_equations(op, rng.standard_normal(size), tol, 50)
        assert result.converged
        assert result.history[-1] <= tol
        assert all(value > tol for value in result.history[:-1])
        assert op.matvec_count == result.iterations

    def test_exact_convergence_reports_success(self):
        result = cg_normal_equations(exact_from_dense(2.0 * np.eye(4)), np.ones(4), 0.0, 10)
        assert result.converged
        assert result.iterations == 1
        assert result.history == [0.0]

    def test_ill_conditioned(self, rng):
        d = np.logspace(0.0, 4.0, 50)
        v = rng.standard_normal(50)
        result = cg_normal_equations(exact_from_dense(np.diag(d)), v, 1e-8 * np.linalg.norm(v), 500)
        assert result.converged
        assert np.linalg.norm(d * result.x - v) <= 1e-6 * np.linalg.norm(v)
        assert len(result.history) == result.iterations

    def test_breakdown(self):
        result = cg_normal_equations(exact_from_dense(-np.eye(4)), np.ones(4), 1e-10, 10)
        assert result.breakdown
        assert not result.converged
        assert result.iterations == 0

    def test_zero_right_hand_side(self):
        result = cg_normal_equations(exact_from_dense(np.eye(3)), np.zeros(3), 0.0, 5)
        assert result.converged
        assert result.iterations == 0

    def test_residual_callback(self, rng):
        d = np.arange(1.0, 21.0)
        v = rng.standard_normal(20)
        calls = []

        def residual(x):
            calls.append(x.copy())
            return float(np.linalg.norm(d * x - v))

        result = cg_normal_equations(exact_from_dense(np.diag(d)), v, 1e-9, 100, residual=residual, cadence=3)
        assert result.converged
        assert result.true_residual <= 1e-9
        assert calls
        assert len(calls) <= result.iterations // 3 + 2

    def test_max_iterations(self, rng):
        d = np.logspace(0.0, 6.0, 40)
        result = cg_normal_equations(exact_from_dense(np.diag(d)), rng.standard_normal(40), 1e-12, 3)
        assert not result.converged
        assert result.iterations == 3

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            cg_normal_equations(LinearOperator(2, 3, lambda w: w[:2]), np.ones(3), 0.1, 1)
        with pytest.raises(InvalidArgumentError):
            cg_normal_equations(exact_from_dense(np.eye(3)), np.ones(4), 0.1, 1)
        with pytest.raises(InvalidArgumentError):
            cg_normal_equations(exact_from_dense(np.eye(3)), np.ones(3), -0.1, 1)

class TestNormEstimate:
    def test_hutchinson_identity(self):
        assert hutchinson_norm(exact_from_dense(np.eye(16)), 4, BitSource(0)) == pytest.approx(4.0)

    def test_hutchinson_rank_one(self):
        matrix = np.zeros((16, 16))
        matrix[0, 0] = 1.0
        assert hutchinson_norm(exact_from_dense(matrix), 3, BitSource(1)) == pytest.approx(1.0)

    def test_scaled_identity(self):
        op = exact_from_dense(3.0 * np.eye(16))
        estimate = estimate_norm(op, op.transpose(), BitSource(2))
        assert estimate.z == pytest.approx(3.0)
        assert estimate.frobenius_estimate == pytest.approx(12.0)

    def test_query_count(self):
        op = exact_from_dense(np.diag(np.arange(1.0, 17.0)))
        estimate = estimate_norm(op, op.transpose(), BitSource(3))
        assert estimate.matvecs_used == setup_queries(16) == count_queries(op)
        assert len(estimate.candidates) == 3
        assert estimate.steps == 8

    def test_accuracy(self, rng):
        matrix = rng.standard_normal((32, 32))
        op = exact_from_dense(matrix)
        estimate = estimate_norm(op, op.transpose(), BitSource(4))
        assert 0.5 * np.linalg.norm(matrix, 2) <= estimate.z <= np.linalg.norm(matrix, 2) * (1 + 1e-9)

    def test_zero_start(self, monkeypatch):
        op = exact_from_dense(np.eye(8))
        src = BitSource(5)
        monkeypatch.setattr(src, "numpy_generator", _ZeroGenerator)
        with pytest.raises(ConvergenceError):
            estimate_norm(op, op.transpose(), src)

    def test_zero_operator(self):
        op = exact_from_dense(np.zeros((4, 4)))
        with pytest.raises(InvalidArgumentError):
            estimate_norm(op, op.transpose(), BitSource(0))

class TestBackwardError:
    def test_exact_solution(self):
        op = exact_from_dense(np.eye(3))
        assert backward_error(op, np.ones(3), np.ones(3), 1.0) == 0.0

    def test_zero_vector(self):
        assert backward_error(exact_from_dense(np.eye(3)), np.zeros(3), np.ones(3), 1.0) == math.inf

    def test_non_positive_norm(self):
        with pytest.raises(InvalidArgumentError):
            backward_error(exact_from_dense(np.eye(3)), np.ones(3), np.ones(3), 0.0)

    def test_higham_correction(self, rng):
        matrix = rng.standard_normal((6, 6))
        x = rng.standard_normal(6)
        b = rng.standard_normal(6)
        corrected = higham_correction(matrix, x, b)
        assert np.allclose(corrected @ x, b)
        distance = np.linalg.norm(corrected - matrix, 2)
        assert distance == pytest.approx(np.linalg.norm(matrix @ x - b) / np.linalg.norm(x))

    def test_iteration_bounds(self):
        bounds = iteration_bounds(10.0, 0.1)
        assert bounds["kappa_normal"] == 100.0
        assert bounds["kappa_log"] == pytest.approx(10.0 * math.log(10.0))
        assert bounds["sqrt_kappa_normal_log"] == pytest.approx(10.0 * math.log(10.0))

    def test_shift_threshold(self):
        assert shift_threshold(8, 0.1, 0.1, 1.0, 1.1) == pytest.approx((16 * 8 * 1.1 / 0.1) ** 2)
        assert shift_threshold(100, 0.1, 0.5, 1.0, 1.5) == pytest.approx(4 * 100 ** 3 / 0.1)

    @pytest.mark.parametrize("cap, used, cadence, expected", [(100, 40, 25, 25), (50, 43, 25, 0), (1000, 0, 1, 332)])
    def test_iteration_budget(self, cap, used, cadence, expected):
        assert cg_iteration_budget(cap, used, cadence) == expected

class TestSolve:
    def test_identity(self, rng):
        op = exact_from_dense(np.eye(8))
        b = rng.standard_normal(8)
        report = solve_backward(op, op.transpose(), b, SolveConfig(0.1), BitSource(0))
        assert report.succeeded
        assert report.backward_ratio <= 0.4
        assert report.chain_holds
        assert report.matvecs_used == count_queries(op) <= report.cap
        assert report.bits_used > 0
        assert report.to_dict()["matvec_cap"] == report.cap

    @pytest.mark.parametrize("seeds, required", [(10, 7), pytest.param(50, 45, marks=pytest.mark.slow)])
    def test_rank_one_success_rate(self, rng, seeds, required):
        n = 16
        matrix = rank_one_matrix(n)
        successes = 0
        for seed in range(seeds):
            op = exact_from_dense(matrix)
            report = solve_backward(op, op.transpose(), rng.standard_normal(n), SolveConfig(0.2), BitSource(seed))
            successes += report.succeeded
        assert successes >= required

    def test_perturbed_dense(self, rng):
        matrix = rng.standard_normal((6, 6))
        op = exact_from_dense(matrix)
        report = solve_backward(op, op.transpose(), rng.standard_normal(6), SolveConfig(0.1), BitSource(1))
        shifted = report.perturbed_dense(matrix)
        expected = matrix + 0.1 * report.norm_estimate * report.perturbation.to_dense() + report.shift
        assert np.allclose(shifted, expected)

    def test_shift_scales_with_perturbed_estimate(self, rng):
        n = 16
        cfg = SolveConfig(0.1)
        op = exact_from_dense(np.eye(n))
        report = solve_backward(op, op.transpose(), rng.standard_normal(n), cfg, BitSource(4))
        assert 0.9 * math.sqrt(n) <= report.shifted_norm_estimate <= 1.1 * math.sqrt(n)
        assert report.shift_threshold == pytest.approx(
            shift_threshold(n, cfg.delta, cfg.eps, report.norm_estimate, report.shifted_norm_estimate))
        assert report.shift == pytest.approx(report.gamma * report.shifted_norm_estimate * math.sqrt(cfg.delta / n))
        assert 0.0 < n * abs(report.shift) <= cfg.eps * report.norm_estimate / 4.0 * (1.0 + 1e-9)
        assert report.to_dict()["shifted_norm_estimate"] == report.shifted_norm_estimate

    def test_no_room_for_cg(self, rng):
        op = exact_from_dense(np.eye(8))
        cap = solve_setup_queries(8) + 3
        report = solve_backward(op, op.transpose(), rng.standard_normal(8), SolveConfig(0.1, max_matvecs=cap), BitSource(0))
        assert report.cap_hit
        assert not report.succeeded
        assert report.iterations == 0
        assert report.backward_ratio == math.inf

    def test_cap_hit_during_cg(self, rng):
        n = 32
        op = exact_from_dense(np.diag(np.logspace(0.0, -6.0, n)))
        cap = solve_setup_queries(n) + 3 + 3 * 5
        cfg = SolveConfig(0.01, max_matvecs=cap, residual_cadence=1)
        report = solve_backward(op, op.transpose(), rng.standard_normal(n), cfg, BitSource(2))
        assert report.cap_hit
        assert report.iterations == 5
        assert report.matvecs_used <= cap

    def test_invalid_right_hand_side(self):
        op = exact_from_dense(np.eye(4))
        with pytest.raises(InvalidArgumentError):
            solve_backward(op, op.transpose(), np.zeros(4), SolveConfig(0.1), BitSource(0))
        with pytest.raises(InvalidArgumentError):
            solve_backward(op, op.transpose(), np.ones(5), SolveConfig(0.1), BitSource(0))

    def test_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            SolveConfig(1.5)
        with pytest.raises(InvalidArgumentError):
            SolveConfig(0.1, max_matvecs=0)
        assert SolveConfig(0.5, matvec_constant=1.0).matvec_cap(10) == math.ceil(10 * math.log(2.0) / 0.125)

    def test_memory_stays_linear(self, rng):
        n = 128
        Settings.set_stream_block_entries(n)
        op = exact_from_dense(np.eye(n))
        b = rng.standard_normal(n)
        tracemalloc.start()
        try:
            report = solve_backward(op, op.transpose(), b, SolveConfig(0.1), BitSource(3))
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        assert report.succeeded
        assert peak < 8 * n * n
