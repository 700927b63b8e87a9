#!/usr/bin/env python3
"""
Accuracy Suite

Runs every configured thin SVD method on the generated test problems
(kappa_B outermost, then kappa_D, then matrix id) and appends one CSV row per
(instance, method) with measured errors, theoretical bounds and pass flags.

Usage:
    python automation/accuracy_suite.py --config data/suites/smoke.toml
"""

import argparse
import logging
import math
import os
import sys
import time
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.errors import NotPositiveDefinite, ThinSvdError, classify_error
from utils.matgen import GeneratedProblem, TestMatrixSpec, build_problem
from utils.metrics import (
    acceptance_backward_limit,
    acceptance_orth_limit,
    acceptance_orth_V_limit,
    acceptance_sv_limit,
    build_metrics_report,
    cross_solver_limit,
    max_rel_sv_error,
    reference_svd,
)
from utils.mp_thinsvd import (
    MIXED_METHODS,
    EigensolverChoice,
    ThinSvdResult,
    get_svd_method,
)
from utils.results_store import (
    existing_keys,
    load_csv,
    row_key,
    save_csv,
    utc_timestamp,
)
from utils.suite_config import RESULTS_DIR, SuiteConfig, build_suite_config, setup_logging

logger = logging.getLogger(__name__)

# ---- CONFIGURATION ----
ACCURACY_CSV = os.path.join(RESULTS_DIR, 'accuracy.csv')

TWOSIDED = EigensolverChoice.TWOSIDED_JACOBI.value
GRAM_CHOL = EigensolverChoice.GRAM_CHOL_SVD.value
# Rows of these methods decide the exit code
HARD_METHODS = (TWOSIDED, GRAM_CHOL)
# Method re-run when the primary one hits a Cholesky breakdown
FALLBACKS = {GRAM_CHOL: TWOSIDED}

EXIT_OK = 0
EXIT_BOUND_FAILURE = 1
EXIT_SOLVER_ERROR = 3

ACCURACY_COLUMNS = [
    "timestamp", "n", "m", "m_ratio", "seed", "matrix_id", "mode_D", "mode_Sigma",
    "kappa_B", "kappa_D", "kappa_B_realized", "kappa_A_realized", "method",
    "success", "error", "error_type", "fallback",
    "max_rel_sv_err", "orth_U", "orth_V", "rowwise_backward_max", "zero_rows",
    "bound_sv", "bound_orth", "bound_backward", "assumption_ok",
    "accept_sv", "accept_orth", "accept_backward",
    "pass_sv", "pass_orth", "pass_backward", "pass_bound_domination",
    "cross_solver_rel_diff", "pass_cross_solver", "hard",
    "wall_time_sec", "sweeps",
]
KAPPA_D_COLUMNS = [
    "kappa_B", "method", "kappa_D_min", "kappa_D_max",
    "max_err_at_kappa_D_min", "max_err_at_kappa_D_max", "growth_ratio",
]


def instance_specs(cfg: SuiteConfig) -> List[TestMatrixSpec]:
    """Problems of the suite in run order: kappa_B, then kappa_D, then matrix id."""
    return [
        TestMatrixSpec(m=cfg.m, n=cfg.n, kappa_D=kappa_D, kappa_B=kappa_B,
                       matrix_id=matrix_id, seed=cfg.seed)
        for kappa_B in cfg.kappa_B_list
        for kappa_D in cfg.kappa_D_list
        for matrix_id in cfg.matrix_ids
    ]


def kappa_d_summary_path(out_path: str) -> str:
    return os.path.splitext(out_path)[0] + '.kappa_d.csv'


def base_row(cfg: SuiteConfig, spec: TestMatrixSpec, method: str) -> Dict[str, Any]:
    """Instance fields shared by every row of one problem."""
    mode_D, mode_sigma = spec.modes
    row = {column: None for column in ACCURACY_COLUMNS}
    row.update({
        "timestamp": utc_timestamp(),
        "n": spec.n,
        "m": spec.m,
        "m_ratio": cfg.m_ratio,
        "seed": spec.seed,
        "matrix_id": spec.matrix_id,
        "mode_D": mode_D,
        "mode_Sigma": mode_sigma,
        "kappa_B": float(spec.kappa_B),
        "kappa_D": float(spec.kappa_D),
        "method": method,
        "success": False,
        "fallback": "",
        "hard": method in HARD_METHODS,
    })
    return row


def mark_error(row: Dict[str, Any], exc: BaseException) -> Dict[str, Any]:
    row["success"] = False
    row["error"] = str(exc)
    row["error_type"] = classify_error(exc)
    return row


def run_method(name: str, problem: GeneratedProblem, cfg: SuiteConfig) -> Tuple[ThinSvdResult, str, float]:
    """
    Run one method, falling back when its Cholesky breaks down.

    Returns:
        (result, name of the fallback method or "", wall time in seconds)
    """
    method = get_svd_method(name)
    start = time.perf_counter()
    try:
        result = method(problem.A, threads=cfg.threads, gram_blocks=cfg.gram_blocks)
        return result, "", time.perf_counter() - start
    except NotPositiveDefinite as e:
        fallback = FALLBACKS.get(name)
        if fallback is None:
            raise
        logger.warning("⚠️ %s failed (%s); falling back to %s", name, e, fallback)
        result = get_svd_method(fallback)(problem.A, threads=cfg.threads, gram_blocks=cfg.gram_blocks)
        return result, fallback, time.perf_counter() - start


def fill_metrics(row: Dict[str, Any], problem: GeneratedProblem, reference: np.ndarray,
                 result: ThinSvdResult, fallback: str) -> Dict[str, Any]:
    """Measured errors, bounds, acceptance limits and pass flags of one successful run."""
    n = problem.spec.n
    kappa_B = problem.realized_kappa_B
    variant_name = fallback or row["method"]
    variant = EigensolverChoice(variant_name) if variant_name in MIXED_METHODS else None
    report = build_metrics_report(problem.A, result.factors, reference,
                                  kappa_B, problem.spec.kappa_D, variant=variant)

    accept_sv = acceptance_sv_limit(variant_name, kappa_B)
    accept_orth = acceptance_orth_limit(variant_name, n, kappa_B)
    accept_backward = acceptance_backward_limit(n)
    row.update({
        "success": True,
        "fallback": fallback,
        "max_rel_sv_err": report.max_rel_sv_err,
        "orth_U": report.orth_U,
        "orth_V": report.orth_V,
        "rowwise_backward_max": report.rowwise_backward_max,
        "zero_rows": report.zero_rows,
        "bound_sv": report.bound_sv,
        "bound_orth": report.bound_orth,
        "bound_backward": report.bound_backward,
        "assumption_ok": report.assumption_ok,
        "accept_sv": accept_sv,
        "accept_orth": accept_orth,
        "accept_backward": accept_backward,
        "pass_sv": report.max_rel_sv_err <= accept_sv,
        "pass_orth": (report.orth_U <= accept_orth
                      and report.orth_V <= acceptance_orth_V_limit(variant_name, n)),
        "pass_backward": report.rowwise_backward_max <= accept_backward,
        "pass_bound_domination": (report.max_rel_sv_err <= report.bound_sv
                                  if report.assumption_ok else None),
        "sweeps": result.factors.sweeps,
    })
    return row


def cross_solver_check(results: Dict[str, Tuple[ThinSvdResult, str]],
                       kappa_B: float) -> Optional[Tuple[float, bool]]:
    """
    Relative disagreement between the GramCholSvd and TwoSidedJacobi singular
    values, or None when either is missing or GramCholSvd fell back.
    """
    if TWOSIDED not in results or GRAM_CHOL not in results:
        return None
    (twosided, _), (gram_chol, fallback) = results[TWOSIDED], results[GRAM_CHOL]
    if fallback:
        return None
    diff = max_rel_sv_error(gram_chol.factors.sigma, twosided.factors.sigma)
    return diff, diff <= cross_solver_limit(kappa_B)


def run_instance(cfg: SuiteConfig, spec: TestMatrixSpec, methods: List[str]) -> List[Dict[str, Any]]:
    """All rows of one problem; failures are recorded, never raised."""
    rows = [base_row(cfg, spec, method) for method in methods]
    try:
        problem = build_problem(spec)
        reference = reference_svd(problem.A)
    except (ThinSvdError, ValueError, ArithmeticError) as e:
        logger.error("❌ Generation failed for %s: %s", spec, e)
        return [mark_error(row, e) for row in rows]

    successes: Dict[str, Tuple[ThinSvdResult, str]] = {}
    for row in rows:
        row["kappa_B_realized"] = problem.realized_kappa_B
        row["kappa_A_realized"] = problem.realized_kappa_A
        try:
            result, fallback, elapsed = run_method(row["method"], problem, cfg)
            fill_metrics(row, problem, reference, result, fallback)
            row["wall_time_sec"] = elapsed
            successes[row["method"]] = (result, fallback)
        except (ThinSvdError, ValueError, ArithmeticError) as e:
            logger.error("❌ %s failed on id=%d: %s", row["method"], spec.matrix_id, e)
            mark_error(row, e)

    check = cross_solver_check(successes, problem.realized_kappa_B)
    if check is not None:
        diff, ok = check
        for row in rows:
            if row["method"] in (TWOSIDED, GRAM_CHOL):
                row["cross_solver_rel_diff"] = diff
                row["pass_cross_solver"] = ok
    return rows


def _is_true(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() == 'true'
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return False
    return bool(value)


def _is_false(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() == 'false'
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return False
    return not bool(value)


def row_failures(row: Dict[str, Any]) -> List[str]:
    """Names of the failed hard checks of a row; report-only rows never fail."""
    if not _is_true(row.get("hard")) or not _is_true(row.get("success")):
        return []
    checks = ("pass_sv", "pass_orth", "pass_backward", "pass_bound_domination", "pass_cross_solver")
    return [check for check in checks if _is_false(row.get(check))]


def exit_code(rows: List[Dict[str, Any]]) -> int:
    """3 when any row errored, else 1 when any hard check failed, else 0."""
    if any(not _is_true(row.get("success")) for row in rows):
        return EXIT_SOLVER_ERROR
    if any(row_failures(row) for row in rows):
        return EXIT_BOUND_FAILURE
    return EXIT_OK


def summarize_kappa_d(df: pd.DataFrame) -> pd.DataFrame:
    """Max error at the smallest and largest kappa_D per (kappa_B, method)."""
    if df.empty:
        return pd.DataFrame(columns=KAPPA_D_COLUMNS)
    ok = df[df["success"].map(_is_true)]
    records = []
    for (kappa_B, method), group in ok.groupby(["kappa_B", "method"], sort=False):
        kd_min, kd_max = group["kappa_D"].min(), group["kappa_D"].max()
        at_min = group.loc[group["kappa_D"] == kd_min, "max_rel_sv_err"].max()
        at_max = group.loc[group["kappa_D"] == kd_max, "max_rel_sv_err"].max()
        records.append({
            "kappa_B": kappa_B,
            "method": method,
            "kappa_D_min": kd_min,
            "kappa_D_max": kd_max,
            "max_err_at_kappa_D_min": at_min,
            "max_err_at_kappa_D_max": at_max,
            "growth_ratio": at_max / at_min if at_min > 0 else math.inf,
        })
    return pd.DataFrame(records, columns=KAPPA_D_COLUMNS)


def run_accuracy_suite(cfg: SuiteConfig) -> int:
    """
    Run the accuracy suite and write its CSV files.

    Rows are appended per instance, so an interrupted run keeps its work; with
    cfg.resume, instances whose rows are all present are skipped.

    Returns:
        Exit code over the configured rows: 0 pass, 1 bound failure, 3 errors
    """
    out_path = cfg.out_path or ACCURACY_CSV
    methods = list(dict.fromkeys(cfg.eigensolvers))
    specs = instance_specs(cfg)
    if not cfg.resume and os.path.exists(out_path):
        logger.warning("Removing previous results at %s", out_path)
        os.remove(out_path)
    done = existing_keys(out_path) if cfg.resume else set()

    logger.info("🚀 Accuracy suite: %d instances x %d methods, n=%d, m=%d, seed=%d -> %s",
                len(specs), len(methods), cfg.n, cfg.m, cfg.seed, out_path)
    wanted = set()
    for index, spec in enumerate(specs, start=1):
        keys = {m: row_key({"kappa_B": spec.kappa_B, "kappa_D": spec.kappa_D,
                            "matrix_id": spec.matrix_id, "method": m, "seed": spec.seed,
                            "n": spec.n, "m": spec.m}) for m in methods}
        wanted.update(keys.values())
        todo = [m for m in methods if keys[m] not in done]
        if not todo:
            logger.debug("Skipping instance %d (already stored)", index)
            continue
        rows = run_instance(cfg, spec, todo)
        save_csv(rows, out_path, ACCURACY_COLUMNS)
        failed = [f"{row['method']}:{','.join(row_failures(row)) or row['error_type']}"
                  for row in rows if row_failures(row) or not row["success"]]
        status = "✅" if not failed else "❌"
        logger.info("%s [%d/%d] kappa_B=%.0e kappa_D=%.0e id=%d%s", status, index, len(specs),
                    spec.kappa_B, spec.kappa_D, spec.matrix_id,
                    f" failed: {'; '.join(failed)}" if failed else "")

    df = load_csv(out_path)
    if not df.empty:
        df = df[[row_key(record) in wanted for record in df.to_dict(orient='records')]]
    summary = summarize_kappa_d(df)
    summary.to_csv(kappa_d_summary_path(out_path), index=False)

    records = df.to_dict(orient='records')
    code = exit_code(records)
    errors = sum(not _is_true(r.get("success")) for r in records)
    failures = sum(bool(row_failures(r)) for r in records)
    logger.info("🏁 Accuracy suite finished: %d rows, %d errors, %d hard failures, exit %d",
                len(records), errors, failures, code)
    return code


def main():
    parser = argparse.ArgumentParser(description="Run the thin SVD accuracy suite")
    parser.add_argument("--config", help="toml suite configuration")
    parser.add_argument("--out", help="output CSV path")
    args = parser.parse_args()
    try:
        cfg = build_suite_config(args.config, {"out_path": args.out})
    except ValueError as e:
        parser.error(str(e))
    setup_logging(cfg.log_file)
    sys.exit(run_accuracy_suite(cfg))


if __name__ == "__main__":
    main()
