#!/usr/bin/env python3
"""
Summary of the accuracy and perf suite CSVs
"""

import argparse
import os
import sys

import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from automation.accuracy_suite import ACCURACY_CSV, summarize_kappa_d
from automation.perf_suite import PERF_CSV

PASS_COLUMNS = ['pass_sv', 'pass_orth', 'pass_backward', 'pass_bound_domination', 'pass_cross_solver']


def _as_bool(series: pd.Series) -> pd.Series:
    """True/False/empty CSV column -> booleans, empty counted as False."""
    return series.map(lambda v: str(v).strip().lower() == 'true')


def accuracy_summary(df: pd.DataFrame) -> pd.DataFrame:
    """Worst error against its limit and bound, and pass counts, per (kappa_B, method)."""
    df = df.copy()
    df['success'] = _as_bool(df['success'])
    for column in PASS_COLUMNS:
        df[column] = _as_bool(df[column])
    grouped = df.groupby(['kappa_B', 'method'])
    summary = grouped.agg(
        rows=('success', 'size'),
        successes=('success', 'sum'),
        max_err=('max_rel_sv_err', 'max'),
        accept_sv=('accept_sv', 'max'),
        bound_sv=('bound_sv', 'max'),
        max_orth_U=('orth_U', 'max'),
        max_backward=('rowwise_backward_max', 'max'),
        pass_sv=('pass_sv', 'sum'),
        pass_orth=('pass_orth', 'sum'),
        pass_backward=('pass_backward', 'sum'),
        pass_bound_domination=('pass_bound_domination', 'sum'),
    )
    return summary.reset_index()


def perf_ratio_table(df: pd.DataFrame) -> pd.DataFrame:
    """ratio_to_qr with one row per (n, m_ratio) and one column per method."""
    ok = df[_as_bool(df['success'])]
    return ok.pivot_table(index=['n', 'm_ratio'], columns='method', values='ratio_to_qr', aggfunc='median')


def analyze_accuracy(path: str) -> None:
    df = pd.read_csv(path)
    print("🔍 ACCURACY SUITE ANALYSIS")
    print("=" * 60)
    print(f"\n📊 DATASET OVERVIEW:")
    print(f"   Total Rows: {len(df):,}")
    print(f"   Instances: {len(df.drop_duplicates(['kappa_B', 'kappa_D', 'matrix_id', 'seed']))}")
    print(f"   Methods: {', '.join(df['method'].unique())}")
    print(f"   Sizes: {', '.join(sorted({f'{m}x{n}' for m, n in zip(df['m'], df['n'])}))}")

    print(f"\n🎯 WORST ERRORS PER kappa(B):")
    with pd.option_context('display.width', 200, 'display.max_columns', None):
        print(accuracy_summary(df).to_string(index=False, float_format=lambda v: f"{v:.3e}"))

    print(f"\n📈 kappa(D) GROWTH:")
    growth = summarize_kappa_d(df)
    if growth.empty:
        print("   No successful rows")
    else:
        print(growth.to_string(index=False, float_format=lambda v: f"{v:.3e}"))

    print(f"\n🚨 ERROR ANALYSIS:")
    failures = df[~_as_bool(df['success'])]
    if len(failures) > 0:
        print(f"   Total Errors: {len(failures)}")
        for error_type, count in failures['error_type'].value_counts().items():
            print(f"     {error_type}: {count}")
    else:
        print("   No errors recorded in the dataset")
    fallbacks = df['fallback'].fillna('').astype(str).str.len() > 0
    print(f"   Fallbacks: {int(fallbacks.sum())}")


def analyze_perf(path: str) -> None:
    df = pd.read_csv(path)
    print(f"\n⏱️ PERF SUITE ANALYSIS")
    print("=" * 60)
    print(f"   Total Rows: {len(df):,}")
    print(f"   Threads: {', '.join(str(t) for t in sorted(df['threads'].unique()))}")
    print(f"\n📊 RATIO TO QR BASELINE:")
    print(perf_ratio_table(df).to_string(float_format=lambda v: f"{v:.3f}"))


def main():
    parser = argparse.ArgumentParser(description="Summarize suite CSVs")
    parser.add_argument('--accuracy', default=ACCURACY_CSV)
    parser.add_argument('--perf', default=PERF_CSV)
    args = parser.parse_args()
    found = False
    if os.path.exists(args.accuracy):
        analyze_accuracy(args.accuracy)
        found = True
    if os.path.exists(args.perf):
        analyze_perf(args.perf)
        found = True
    if not found:
        print(f"No results found at {args.accuracy} or {args.perf}")
        sys.exit(1)
    print(f"\n" + "=" * 60)
    print("✅ Analysis Complete!")


if __name__ == "__main__":
    main()
