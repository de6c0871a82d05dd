"""Experiment commands"""

import math
import logging
import multiprocessing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..common.common_errors import InvalidArgumentError
from ..common.common_settings import Settings
from ..rng.rng_bit_source import BitSource
from ..kwise.kwise_family import verify_kwise_uniformity
from ..pattern.pattern_matrix import build_pattern
from ..pattern.pattern_hadamard import hadamard_sparse_witness
from ..pattern.pattern_calibration import calibrate
from ..perturb.perturb_settings import PerturbationSettings
from ..perturb.perturb_oblivious import ObliviousPerturbation, build_perturbation, gaussian_perturbation
from ..perturb.perturb_storage import save_perturbation
from ..operator.operator_linear import exact_from_dense
from ..operator.operator_algebra import inexact_wrap
from ..solver.solver_backward import higham_correction, iteration_bounds, solve_backward
from ..spectra.spectra_oracle import spectral_norm, svd_small
from ..spectra.spectra_adversarial import jordan_matrix, dense_trap_matrix, near_singular_matrix, rank_one_matrix
from .experiment_config import ExperimentConfig
from .experiment_files import dump_json, emit_text, read_matrix, read_vector, schema_document, table_text

FAMILIES : tuple[str, ...] = ("dense_trap", "jordan", "near_singular", "rank_one")
POSITIVE_THRESHOLD : float = 1e-12
EXIT_SUCCESS : int = 0
EXIT_FAILURE : int = 1
EXIT_CAP_HIT : int = 2

@dataclass
class CommandResult:
    """Document or table produced by a command, with its exit code"""

    document : dict = field(default_factory=dict)
    table : pd.DataFrame | None = None
    exit_code : int = EXIT_SUCCESS

@dataclass(frozen=True)
class ConditionTask:
    """One (family, n, seed) trial of the condition experiment"""

    family : str
    n : int
    seed : int
    eps : float
    delta : float
    settings : dict
    kind : str
    oracle_cap : int
    method : str

def family_matrix(family : str, n : int, perturbation : ObliviousPerturbation, src : BitSource) -> np.ndarray:
    """Returns the unit-norm adversarial input named family

    The dense_trap family is built against the pattern the perturbation itself uses.
    """
    if family == "rank_one":
        return rank_one_matrix(n)
    if family == "jordan":
        return jordan_matrix(n)
    if family == "near_singular":
        return near_singular_matrix(n, src)
    if family == "dense_trap":
        r1 = perturbation.r1
        matrix = dense_trap_matrix(r1.pattern.to_dense() * r1.scale)
        scale = float(np.abs(matrix).max())
        return matrix / scale if scale > 0.0 else rank_one_matrix(n)
    raise InvalidArgumentError(f"unknown matrix family {family!r}, choose one of {FAMILIES}")

def condition_trial(task : ConditionTask) -> dict:
    """Returns the spectral summary of A + eps R for one trial"""
    Settings.set_oracle_cap(task.oracle_cap)
    src = BitSource(task.seed)
    perturbation = build_perturbation(task.n, task.eps, task.delta, PerturbationSettings.from_dict(task.settings), src)
    if task.kind == "gaussian":
        r = gaussian_perturbation(task.n, src.derive(1))
    elif task.kind == "dense-only":
        r = perturbation.r1.to_dense()
    else:
        r = perturbation.to_dense()
    matrix = family_matrix(task.family, task.n, perturbation, src.derive(2))
    report = svd_small(matrix + task.eps * r, method=task.method)
    return {
        "family": task.family,
        "n": task.n,
        "seed": task.seed,
        "s_1": report.s_1,
        "s_n": report.s_n,
        "kappa": report.kappa,
        "bits": perturbation.bits_total if task.kind != "gaussian" else 0,
    }

def _quiet_worker() -> None:
    logging.disable(logging.INFO)

def run_trials(tasks : list[ConditionTask], workers : int) -> list[dict]:
    """Runs trials in a worker pool, results ordered by (family, n, seed)"""
    if workers > 1 and len(tasks) > 1:
        logging.info("Running %d trials on %d workers, worker logging limited to warnings", len(tasks), workers)
        with multiprocessing.get_context("spawn").Pool(workers, initializer=_quiet_worker) as pool:
            rows = pool.map(condition_trial, tasks)
    else:
        rows = [condition_trial(task) for task in tasks]
    return sorted(rows, key=lambda row: (row["family"], row["n"], row["seed"]))

def log_log_slope(n_values, medians) -> float | None:
    """Returns the least-squares slope of log median against log n, None if undefined"""
    points = [(n, value) for n, value in zip(n_values, medians) if math.isfinite(value) and value > 0.0]
    if len({n for n, _ in points}) < 2:
        return None
    x = np.log([n for n, _ in points])
    y = np.log([value for _, value in points])
    return float(np.polyfit(x, y, 1)[0])

def condition_summary(table : pd.DataFrame, delta : float) -> dict:
    """Returns per-(family, n) medians and delta-quantiles, and per-family slopes"""
    groups = []
    slopes = {}
    for family, rows in table.groupby("family", sort=True):
        medians = []
        n_values = []
        for n, trial in rows.groupby("n", sort=True):
            s_n = trial["s_n"].to_numpy(dtype=np.float64)
            kappa = trial["kappa"].to_numpy(dtype=np.float64)
            quantile = float(np.quantile(s_n, delta))
            median_kappa = float(np.median(kappa))
            groups.append({
                "family": family,
                "n": int(n),
                "trials": int(s_n.size),
                "median_kappa": median_kappa,
                "median_s_n": float(np.median(s_n)),
                "s_n_quantile": quantile,
                "fraction_below_quantile": float(np.mean(s_n < quantile)),
                "fraction_positive": float(np.mean(s_n > POSITIVE_THRESHOLD)),
            })
            n_values.append(int(n))
            medians.append(median_kappa)
        slopes[family] = log_log_slope(n_values, medians)
    return {"delta": delta, "groups": groups, "slopes": slopes}

def cmd_gen_perturbation(cfg : ExperimentConfig) -> CommandResult:
    """Builds R, writes it to cfg.out and reports its bit budget"""
    perturbation = build_perturbation(cfg.n, cfg.eps, cfg.delta, cfg.perturbation, BitSource(cfg.seed))
    size = save_perturbation(perturbation, cfg.out)
    document = perturbation.summary()
    document.update({"seed": cfg.seed, "eps": cfg.eps, "delta": cfg.delta, "path": str(cfg.out), "bytes": size})
    return CommandResult(document)

def cmd_condition_experiment(cfg : ExperimentConfig) -> CommandResult:
    """Measures s_n and kappa of A + eps R over the adversarial families"""
    tasks = [
        ConditionTask(family, n, seed, cfg.eps, cfg.delta, cfg.perturbation.to_dict(),
            cfg.perturbation_kind, Settings.oracle_cap, cfg.method)
        for family in FAMILIES
        for n in cfg.n_values
        for seed in cfg.trial_seeds()
    ]
    rows = run_trials(tasks, cfg.workers)
    table = pd.DataFrame(rows, columns=["family", "n", "seed", "s_1", "s_n", "kappa", "bits"])
    summary = condition_summary(table, cfg.delta) if rows else {"delta": cfg.delta, "groups": [], "slopes": {}}
    summary["perturbation"] = cfg.perturbation_kind
    return CommandResult(summary, table)

def cmd_solve(cfg : ExperimentConfig) -> CommandResult:
    """Solves A x = b from matvec queries and certifies the backward error"""
    matrix = read_matrix(cfg.matrix)
    b = read_vector(cfg.rhs)
    if b.size != matrix.shape[0]:
        raise InvalidArgumentError(f"matrix is {matrix.shape[0]}x{matrix.shape[1]} but the right-hand side has {b.size} entries")
    op_a = exact_from_dense(matrix, "input")
    if cfg.eps_mach > 0.0:
        op_a = inexact_wrap(op_a, cfg.eps_mach, float(np.linalg.norm(matrix)) or 1.0, cfg.policy, cfg.seed)
    report = solve_backward(op_a, op_a.transpose(), b, cfg.solve_config(), BitSource(cfg.seed))
    document = report.to_dict()
    if cfg.diagnose and np.any(report.x):
        shifted = svd_small(report.perturbed_dense(matrix), method=cfg.method)
        if math.isfinite(shifted.kappa):
            report.iteration_bounds = iteration_bounds(shifted.kappa, cfg.eps)
            document["iteration_bounds"] = report.iteration_bounds
        corrected = higham_correction(matrix, report.x, b)
        document["higham_relative_distance"] = spectral_norm(corrected - matrix, cfg.method) / spectral_norm(matrix, cfg.method)
    if report.succeeded:
        code = EXIT_SUCCESS
    elif report.cap_hit:
        code = EXIT_CAP_HIT
    else:
        code = EXIT_FAILURE
    return CommandResult(document, exit_code=code)

def cmd_bit_audit(cfg : ExperimentConfig) -> CommandResult:
    """Counts the random bits of R across dimensions against n log2 n"""
    components = ("pattern_v1", "pattern_v2", "pattern_v3", "dense_signs", "sparse_subsets", "sparse_signs")
    rows = []
    for n in cfg.n_values:
        for seed in cfg.trial_seeds():
            report = build_perturbation(n, cfg.eps, cfg.delta, cfg.perturbation, BitSource(seed)).bit_report
            row = {"n": n, "seed": seed, "bits_total": report["total"]}
            row.update({name: report.get(name, 0) for name in components})
            row["ratio"] = report["total"] / (n * math.log2(n)) if n > 1 else math.inf
            rows.append(row)
    table = pd.DataFrame(rows, columns=["n", "seed", "bits_total", *components, "ratio"])
    summary : dict = {"delta": cfg.delta, "trials": cfg.trials}
    if rows:
        ratios = table.groupby("n")["ratio"].mean()
        sparse = (table["sparse_subsets"] + table["sparse_signs"]) / table["bits_total"]
        summary.update({
            "ratio_by_n": {str(n): float(value) for n, value in ratios.items()},
            "max_ratio": float(ratios.max()),
            "min_ratio": float(ratios.min()),
            "max_over_min": float(ratios.max() / ratios.min()),
            "sparse_share": float(sparse.mean()),
        })
    return CommandResult(summary, table)

def cmd_pattern_check(cfg : ExperimentConfig) -> CommandResult:
    """Calibrates the pattern constants and reports the Hadamard sparsity witness"""
    n = cfg.n
    src = BitSource(cfg.seed)
    pattern = build_pattern(n, src)
    include_rho = n <= Settings.oracle_cap
    if not include_rho:
        logging.warning("n=%d exceeds the oracle cap %d, rho_hat skipped", n, Settings.oracle_cap)
    calibration = calibrate(pattern, max(1, cfg.trials), cfg.perturbation.alpha, src, include_rho)
    document = calibration.to_dict()
    document.update({"n": n, "seed": cfg.seed, "checksum": pattern.checksum()})
    document["hadamard"] = hadamard_sparse_witness(cfg.k).to_dict()
    return CommandResult(document)

def cmd_spectra(cfg : ExperimentConfig) -> CommandResult:
    """Reports the singular values of a matrix file"""
    report = svd_small(read_matrix(cfg.input_path), method=cfg.method)
    return CommandResult(report.to_dict())

def cmd_kwise_audit(cfg : ExperimentConfig) -> CommandResult:
    """Checks k-wise uniformity of the polynomial families over GF(2^m) exhaustively"""
    audit = verify_kwise_uniformity(cfg.m, cfg.k)
    passed = audit.uniform and audit.pairwise_uncorrelated and audit.bias_free
    return CommandResult(audit.to_dict(), exit_code=EXIT_SUCCESS if passed else EXIT_FAILURE)

COMMAND_HANDLERS = {
    "gen-perturbation": cmd_gen_perturbation,
    "condition-experiment": cmd_condition_experiment,
    "solve": cmd_solve,
    "bit-audit": cmd_bit_audit,
    "pattern-check": cmd_pattern_check,
    "spectra": cmd_spectra,
    "kwise-audit": cmd_kwise_audit,
}

def run_command(cfg : ExperimentConfig) -> int:
    """Runs a validated command, writes its output and returns the exit code"""
    result = COMMAND_HANDLERS[cfg.command](cfg)
    if result.table is not None:
        text = table_text(result.table, cfg.output_format, cfg.command, result.document)
    else:
        text = dump_json(schema_document(cfg.command, result.document))
    target = cfg.json_out if cfg.command == "gen-perturbation" else (cfg.json_out or cfg.out)
    emit_text(text, target)
    logging.info("%s finished with exit code %d", cfg.command, result.exit_code)
    return result.exit_code
