#!/usr/bin/env python3
"""
Mixed precision thin SVD: command-line entry point.

Subcommands:
    gen       write one generated test problem to a directory
    accuracy  run the accuracy suite and write its CSV
    perf      run the timing suite and write its CSV

Exit codes: 0 success, 1 a hard accuracy bound failed, 2 usage error,
3 a solver or generation error.
"""
import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from automation.accuracy_suite import run_accuracy_suite
from automation.perf_suite import run_perf_suite
from utils.dense_core import DiagMatrix, Precision
from utils.errors import ThinSvdError
from utils.matgen import TestMatrixSpec, build_problem
from utils.matrix_io import write_matrix
from utils.mp_thinsvd import METHODS
from utils.results_store import save_json
from utils.suite_config import RESULTS_DIR, SuiteConfig, build_suite_config, setup_logging

logger = logging.getLogger(__name__)

EXIT_SOLVER_ERROR = 3


def _split(text: Optional[str]) -> List[str]:
    if text is None:
        return []
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="app.py",
        description="Mixed precision Gram-based thin SVD experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("gen", "generate one test problem (first value of each list is used)"),
        ("accuracy", "run the accuracy suite"),
        ("perf", "run the timing suite"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="toml file of key = value settings; flags override it")
        sub.add_argument("--n", help="column count; a comma list for perf")
        sub.add_argument("--m-ratio", dest="m_ratio", help="m / n; a comma list for perf")
        sub.add_argument("--kappa-b", dest="kappa_b", help="comma list of kappa(B) values")
        sub.add_argument("--kappa-d", dest="kappa_d", help="comma list of kappa(D) values")
        sub.add_argument("--matrix-ids", dest="matrix_ids", help="comma list of ids in 1..16")
        sub.add_argument("--eigensolver", action="append", choices=METHODS,
                         help="method to run; repeat for several")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--threads", type=int, help="workers of the Gram phase")
        sub.add_argument("--gram-blocks", dest="gram_blocks", type=int,
                         help="fixed block count of the Gram phase")
        sub.add_argument("--out", help="output CSV (accuracy, perf) or directory (gen)")
        sub.add_argument("--no-resume", dest="resume", action="store_false", default=None,
                         help="discard rows already in the output CSV")
        sub.add_argument("--log-file", dest="log_file")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Map parsed flags onto SuiteConfig fields; unset flags map to None."""
    ns, ratios = _split(args.n), _split(args.m_ratio)
    return {
        "n": ns[0] if ns else None,
        "perf_n_list": ns or None,
        "m_ratio": ratios[0] if ratios else None,
        "perf_m_ratio_list": ratios or None,
        "kappa_B_list": args.kappa_b,
        "kappa_D_list": args.kappa_d,
        "matrix_ids": args.matrix_ids,
        "eigensolvers": args.eigensolver,
        "seed": args.seed,
        "threads": args.threads,
        "gram_blocks": args.gram_blocks,
        "out_path": args.out,
        "resume": args.resume,
        "log_file": args.log_file,
    }


def gen_command(spec: TestMatrixSpec, out_dir: str) -> Dict[str, Any]:
    """
    Build a problem and write A, B, D and sigma_ref in the text format,
    plus metadata.json.

    Returns:
        The metadata written
    """
    problem = build_problem(spec)
    os.makedirs(out_dir, exist_ok=True)
    write_matrix(os.path.join(out_dir, "A.txt"), problem.A)
    write_matrix(os.path.join(out_dir, "B.txt"), problem.B)
    write_matrix(os.path.join(out_dir, "D.txt"), problem.D)
    write_matrix(os.path.join(out_dir, "sigma_ref.txt"), DiagMatrix(problem.sigma_ref, Precision.HIGHER))
    mode_D, mode_sigma = spec.modes
    metadata = {
        "m": spec.m,
        "n": spec.n,
        "kappa_D": spec.kappa_D,
        "kappa_B": spec.kappa_B,
        "matrix_id": spec.matrix_id,
        "seed": spec.seed,
        "mode_D": mode_D,
        "mode_Sigma": mode_sigma,
        "realized_kappa_B": problem.realized_kappa_B,
        "realized_kappa_A": problem.realized_kappa_A,
    }
    save_json(metadata, os.path.join(out_dir, "metadata.json"))
    logger.info("📦 Wrote problem %dx%d id=%d to %s (realized kappa_B=%.3e)",
                spec.m, spec.n, spec.matrix_id, out_dir, problem.realized_kappa_B)
    return metadata


def run_gen(cfg: SuiteConfig) -> int:
    spec = TestMatrixSpec(m=cfg.m, n=cfg.n, kappa_D=cfg.kappa_D_list[0], kappa_B=cfg.kappa_B_list[0],
                          matrix_id=cfg.matrix_ids[0], seed=cfg.seed)
    out_dir = cfg.out_path or os.path.join(
        RESULTS_DIR, f"problem_n{spec.n}_m{spec.m}_id{spec.matrix_id}_seed{spec.seed}")
    try:
        gen_command(spec, out_dir)
    except (ThinSvdError, OSError, ArithmeticError) as e:
        logger.error("❌ Generation failed: %s", e)
        return EXIT_SOLVER_ERROR
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, build the suite configuration and dispatch."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_suite_config(args.config, overrides_from_args(args))
    except ValueError as e:
        parser.error(str(e))
    setup_logging(cfg.log_file)

    if args.command == "gen":
        return run_gen(cfg)
    if args.command == "accuracy":
        return run_accuracy_suite(cfg)
    return run_perf_suite(cfg)


if __name__ == "__main__":
    sys.exit(main())
