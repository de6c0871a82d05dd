"""Main module for the oblivious perturbation toolkit"""

import sys
import signal
import logging
import argparse
import datetime
from pathlib import Path

from .version import __version__ as version
from .src.common.common_errors import ObliviousError
from .src.common.common_settings import Settings
from .src.perturb.perturb_settings import PerturbationSettings
from .src.experiment.experiment_config import (
    COMMANDS, OUTPUT_FORMATS, PERTURBATION_KINDS, SVD_METHODS, ExperimentConfig, parse_seed, parse_seeds)
from .src.experiment.experiment_commands import run_command

APPLICATION_NAME : str = "oblivious-perturbation"

try:
    start_time = datetime.datetime.now().strftime("%Y-%m-%d")
    Path(Settings.log_directory).mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        filename=f"{Settings.log_directory}/oblivious-{start_time}.log",
        level=logging.DEBUG,
        format="%(asctime)s - %(levelname)s - %(filename)s - %(message)s")
except OSError:
    logging.basicConfig(
        level=logging.DEBUG,
        format="%(asctime)s - %(levelname)s - %(filename)s - %(message)s",
        handlers=[logging.StreamHandler()])

def signal_handler(sig, frame) -> None:
    logging.warning("Ctrl+C keyboard interrupt. Exiting...")
    try:
        signal.default_int_handler(sig, frame)
    except KeyboardInterrupt:
        sys.exit(1)
signal.signal(signal.SIGINT, signal_handler)

DEFAULT_DIMENSIONS : dict[str, list[int]] = {
    "bit-audit": [256, 1024, 4096],
}
DEFAULT_TRIALS : dict[str, int] = {
    "condition-experiment": 10,
    "bit-audit": 1,
    "pattern-check": 200,
}
COMMAND_HELP : dict[str, str] = {
    "gen-perturbation": "Builds a perturbation, writes it to --out and prints its bit budget",
    "condition-experiment": "Measures s_n and kappa of A + eps R over adversarial matrix families",
    "solve": "Solves A x = b from matvec queries with a certified backward error",
    "bit-audit": "Counts random bits of R against n log2 n over a dimension sweep",
    "pattern-check": "Calibrates pattern constants and reports the Hadamard witness",
    "spectra": "Prints the singular values of a matrix file",
    "kwise-audit": "Exhaustively checks k-wise uniformity over GF(2^m)",
}

def _shared_options() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--n", type=int, nargs="+", help="dimension(s)")
    shared.add_argument("--seed", type=parse_seed, help="64-bit seed, decimal or 0x-prefixed")
    shared.add_argument("--seeds", type=parse_seeds, help="seed list such as 1,2,10-14")
    shared.add_argument("--eps", type=float, help="perturbation size or target backward error")
    shared.add_argument("--delta", type=float, help="failure budget")
    shared.add_argument("--K", dest="k_subset", type=int, help="subset size of the sparse part")
    shared.add_argument("--L", dest="l_threshold", type=int, help="row threshold of the sparse part")
    shared.add_argument("--alpha", type=float, help="sparsity constant")
    shared.add_argument("--beta", type=float, help="coordinate magnitude constant")
    shared.add_argument("--gamma", type=float, help="coordinate fraction constant")
    shared.add_argument("--rho", type=float, help="pattern norm constant")
    shared.add_argument("--theory-rule", action="store_true", help="derive K and L from delta and alpha")
    shared.add_argument("--trials", type=int, help="trials per point")
    shared.add_argument("--out", help="output file")
    shared.add_argument("--json-out", help="JSON report file, stdout when omitted")
    shared.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default="json")
    shared.add_argument("--oracle-cap", type=int, help=f"largest dense dimension, also ${Settings.oracle_cap_variable}")
    shared.add_argument("--config", help="TOML file with [settings], [perturbation] and [solver] tables")
    shared.add_argument("--method", choices=SVD_METHODS, default="jacobi", help="dense SVD oracle")
    return shared

def build_parser() -> argparse.ArgumentParser:
    """Returns the command-line parser"""
    parser = argparse.ArgumentParser(prog=APPLICATION_NAME, description="Oblivious perturbations and backward-stable linear solves")
    commands = parser.add_subparsers(dest="command", metavar="command")
    shared = _shared_options()
    parsers = {name: commands.add_parser(name, parents=[shared], help=COMMAND_HELP[name]) for name in COMMANDS}
    parsers["condition-experiment"].add_argument("--workers", type=int, default=1, help="worker processes")
    parsers["condition-experiment"].add_argument("--perturbation", dest="perturbation_kind", choices=PERTURBATION_KINDS, default="oblivious")
    parsers["solve"].add_argument("--matrix", required=True, help="matrix file, dense .csv or coordinate text")
    parsers["solve"].add_argument("--rhs", required=True, help="right-hand side file")
    parsers["solve"].add_argument("--eps-mach", type=float, default=0.0, help="inexact matvec accuracy")
    parsers["solve"].add_argument("--policy", choices=("adversarial", "random", "rounding"), default="rounding")
    parsers["solve"].add_argument("--max-matvecs", type=int, help="matvec cap")
    parsers["solve"].add_argument("--diagnose", action="store_true", help="dense condition and certification diagnostics")
    parsers["spectra"].add_argument("--in", dest="input_path", required=True, help="matrix file")
    parsers["pattern-check"].add_argument("--k", type=int, default=2, help="Hadamard witness on n = 4^k")
    parsers["kwise-audit"].add_argument("--k", type=int, default=2, help="independence order")
    parsers["kwise-audit"].add_argument("--m", type=int, default=3, help="field degree")
    help_parser = commands.add_parser("help", help="Shows help for a command")
    help_parser.add_argument("topic", nargs="?", choices=COMMANDS)
    commands.add_parser("version", help="Shows the version")
    return parser

def _perturbation_settings(args : argparse.Namespace, table : dict) -> PerturbationSettings:
    settings = PerturbationSettings.from_dict(table)
    overrides = {
        "alpha": args.alpha,
        "beta": args.beta,
        "gamma": args.gamma,
        "rho": args.rho,
        "k": args.k_subset,
        "l": args.l_threshold,
    }
    changes = {key: value for key, value in overrides.items() if value is not None}
    if args.theory_rule:
        changes["theory_rule"] = True
    return settings.replace(**changes) if changes else settings

def config_from_args(args : argparse.Namespace) -> ExperimentConfig:
    """Merges configuration file values and flags, flags taking precedence"""
    document = Settings.load_file(args.config) if args.config else {}
    solver = dict(document.get("solver", {}))
    command = args.command
    n_values = args.n or DEFAULT_DIMENSIONS.get(command, [64])
    if args.seeds:
        seeds = args.seeds
    else:
        seeds = [0 if args.seed is None else args.seed]
    cfg = ExperimentConfig(
        command=command,
        n_values=list(n_values),
        seeds=seeds,
        eps=args.eps if args.eps is not None else float(solver.get("eps", 0.1)),
        delta=args.delta if args.delta is not None else float(solver.get("delta", 0.1)),
        perturbation=_perturbation_settings(args, document.get("perturbation", {})),
        trials=args.trials if args.trials is not None else DEFAULT_TRIALS.get(command, 1),
        out=args.out,
        output_format=args.output_format,
        oracle_cap=args.oracle_cap,
        workers=getattr(args, "workers", 1),
        json_out=args.json_out,
        matrix=getattr(args, "matrix", None),
        rhs=getattr(args, "rhs", None),
        input_path=getattr(args, "input_path", None),
        k=getattr(args, "k", 2),
        m=getattr(args, "m", 3),
        policy=getattr(args, "policy", "rounding"),
        eps_mach=getattr(args, "eps_mach", 0.0),
        method=args.method,
        perturbation_kind=getattr(args, "perturbation_kind", "oblivious"),
        diagnose=getattr(args, "diagnose", False),
        max_matvecs=getattr(args, "max_matvecs", None),
        solver={key: value for key, value in solver.items() if key != "delta"})
    return cfg.validate()

def main(arg = None) -> None:
    """Executes main function"""
    args_list = sys.argv[1:] if arg is None else ([arg] if isinstance(arg, str) else list(arg))
    parser = build_parser()
    args = parser.parse_args(args_list)
    logging.info("-" * 120)
    logging.info("%s %s: %s", APPLICATION_NAME, version, " ".join(args_list))
    if args.command is None:
        parser.print_help()
        sys.exit(0)
    if args.command == "help":
        if args.topic is None:
            parser.print_help()
        else:
            parser.parse_args([args.topic, "--help"])
        sys.exit(0)
    if args.command == "version":
        print(f"{APPLICATION_NAME} {version}")
        sys.exit(0)
    try:
        cfg = config_from_args(args)
        code = run_command(cfg)
    except ObliviousError as error:
        logging.error("%s failed: %s", args.command, error)
        print(f"{APPLICATION_NAME} {args.command}: {error}", file=sys.stderr)
        sys.exit(1)
    sys.exit(code)

if __name__ == "__main__":
    main()
