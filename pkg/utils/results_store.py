"""
Results Storage Module for Experiment Suites

Append-only CSV persistence for suite rows, restart-key lookup for resumable
runs, and JSON metadata for generated problems. Everything is local files.
"""

import csv
import json
import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import pandas as pd

logger = logging.getLogger(__name__)

# Restart key of an accuracy row, with the type each column is normalized to
ACCURACY_KEY = (
    ("kappa_B", float),
    ("kappa_D", float),
    ("matrix_id", int),
    ("method", str),
    ("seed", int),
    ("n", int),
    ("m", int),
)


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z')


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_csv(data: List[Dict[str, Any]], path: str, columns: Optional[Sequence[str]] = None) -> None:
    """
    Append rows to a CSV file, creating it (and its directory) when missing.

    Args:
        data: Rows to append
        path: CSV path
        columns: Column order; defaults to the keys of the first row
    """
    if not data:
        return
    fieldnames = list(columns) if columns else list(data[0].keys())
    new_df = pd.DataFrame(data, columns=fieldnames)
    _ensure_parent(path)

    if os.path.exists(path) and os.path.getsize(path) > 0:
        try:
            existing_df = pd.read_csv(path)
            combined_df = pd.concat([existing_df, new_df], ignore_index=True)
            combined_df.to_csv(path, index=False)
            return
        except Exception as e:
            logger.warning("Could not append to existing CSV %s, overwriting: %s", path, e)
            with open(path, 'w', newline='', encoding='utf-8') as f:
                writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction='ignore')
                writer.writeheader()
                writer.writerows(data)
            return
    new_df.to_csv(path, index=False)


def load_csv(path: str) -> pd.DataFrame:
    """Load a results CSV; a missing or empty file gives an empty frame."""
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return pd.DataFrame()
    return pd.read_csv(path)


def row_key(row: Dict[str, Any], key_spec: Iterable[Tuple[str, type]] = ACCURACY_KEY) -> Tuple:
    return tuple(kind(row[name]) for name, kind in key_spec)


def existing_keys(path: str, key_spec: Iterable[Tuple[str, type]] = ACCURACY_KEY) -> Set[Tuple]:
    """
    Restart keys of the rows already stored at path.
    Rows whose key columns are missing or unparsable are ignored.
    """
    key_spec = list(key_spec)
    df = load_csv(path)
    if df.empty or any(name not in df.columns for name, _ in key_spec):
        return set()
    keys = set()
    for record in df[[name for name, _ in key_spec]].to_dict(orient='records'):
        try:
            keys.add(row_key(record, key_spec))
        except (TypeError, ValueError):
            continue
    return keys


def save_json(data: Dict[str, Any], path: str) -> None:
    """Write a one-line JSON object."""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, default=str)
        f.write('\n')
