"""
suite_config.py
Experiment suite configuration: built-in defaults, an optional toml config file,
and command-line overrides, plus the logging setup shared by the runners.
"""
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import toml

from utils.errors import ConfigError
from utils.matgen import MATRIX_ID_MODES
from utils.mp_thinsvd import DEFAULT_GRAM_BLOCKS, METHODS

# ---- CONFIGURATION ----
RESULTS_DIR = os.environ.get("THINSVD_RESULTS_DIR", os.path.join("data", "results"))
LOG_FILE = os.environ.get("THINSVD_LOG_FILE", os.path.join("automation", "thinsvd.log"))
LOG_LEVEL = os.environ.get("THINSVD_LOG_LEVEL", "INFO")

DEFAULT_KAPPA_B = [1e1, 1e2, 1e3, 1e4, 1e5]
DEFAULT_KAPPA_D = [1.0, 1e2, 1e4, 1e6, 1e8]
DEFAULT_METHODS = ["twosided-jacobi", "gram-chol-svd", "qr-baseline"]

# config-file key -> SuiteConfig field
CONFIG_KEYS = {
    "n": "n",
    "m_ratio": "m_ratio",
    "kappa_b": "kappa_B_list",
    "kappa_d": "kappa_D_list",
    "matrix_ids": "matrix_ids",
    "eigensolver": "eigensolvers",
    "eigensolvers": "eigensolvers",
    "seed": "seed",
    "threads": "threads",
    "out": "out_path",
    "gram_blocks": "gram_blocks",
    "resume": "resume",
    "perf_n": "perf_n_list",
    "perf_m_ratio": "perf_m_ratio_list",
    "log_file": "log_file",
}
FLOAT_LIST_FIELDS = {"kappa_B_list", "kappa_D_list"}
INT_LIST_FIELDS = {"matrix_ids", "perf_n_list", "perf_m_ratio_list"}
STR_LIST_FIELDS = {"eigensolvers"}
INT_FIELDS = {"n", "m_ratio", "seed", "threads", "gram_blocks"}


@dataclass
class SuiteConfig:
    n: int = 64
    m_ratio: int = 16
    kappa_B_list: List[float] = field(default_factory=lambda: list(DEFAULT_KAPPA_B))
    kappa_D_list: List[float] = field(default_factory=lambda: list(DEFAULT_KAPPA_D))
    matrix_ids: List[int] = field(default_factory=lambda: sorted(MATRIX_ID_MODES))
    eigensolvers: List[str] = field(default_factory=lambda: list(DEFAULT_METHODS))
    seed: int = 1
    threads: int = 1
    out_path: str = ""
    gram_blocks: int = DEFAULT_GRAM_BLOCKS
    resume: bool = True
    perf_n_list: List[int] = field(default_factory=list)
    perf_m_ratio_list: List[int] = field(default_factory=list)
    log_file: str = LOG_FILE

    @property
    def m(self) -> int:
        return self.m_ratio * self.n

    @property
    def perf_sizes(self) -> List[Tuple[int, int]]:
        """(n, m_ratio) pairs timed by the perf suite."""
        ns = self.perf_n_list or [self.n]
        ratios = self.perf_m_ratio_list or [self.m_ratio]
        return [(n, ratio) for n in ns for ratio in ratios]

    def validate(self) -> "SuiteConfig":
        """
        Check invariants.
        Raises:
            ConfigError: If any value is out of range
        """
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.m_ratio < 1:
            raise ConfigError(f"m_ratio must be >= 1, got {self.m_ratio}")
        for name in ("kappa_B_list", "kappa_D_list", "matrix_ids", "eigensolvers"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        for kappa in self.kappa_B_list + self.kappa_D_list:
            if not kappa >= 1:
                raise ConfigError(f"condition numbers must be >= 1, got {kappa}")
        bad_ids = [i for i in self.matrix_ids if i not in MATRIX_ID_MODES]
        if bad_ids:
            raise ConfigError(f"matrix ids must be in 1..16, got {bad_ids}")
        unknown = [name for name in self.eigensolvers if name not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.gram_blocks < 1:
            raise ConfigError(f"gram_blocks must be >= 1, got {self.gram_blocks}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        for n, ratio in self.perf_sizes:
            if n < 2 or ratio < 1:
                raise ConfigError(f"invalid perf size n={n}, m_ratio={ratio}")
        return self


def _split(value: Any) -> List[Any]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def coerce_value(name: str, value: Any) -> Any:
    """Convert a raw config value to the type of SuiteConfig field `name`."""
    try:
        if name in FLOAT_LIST_FIELDS:
            return [float(item) for item in _split(value)]
        if name in INT_LIST_FIELDS:
            return [int(item) for item in _split(value)]
        if name in STR_LIST_FIELDS:
            return [str(item).strip().lower() for item in _split(value)]
        if name in INT_FIELDS:
            return int(value)
        if name == "resume":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for {name}: {value!r} ({e})")


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat key = value toml file into SuiteConfig field values.
    Raises:
        ConfigError: If the file is missing, malformed or has unknown keys
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = toml.load(path)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"could not parse {path}: {e}")
    values = {}
    for key, value in raw.items():
        name = CONFIG_KEYS.get(key.lower())
        if name is None:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        values[name] = coerce_value(name, value)
    return values


def build_suite_config(config_path: Optional[str] = None,
                       overrides: Optional[Dict[str, Any]] = None) -> SuiteConfig:
    """
    Defaults, then the config file, then overrides (None values are ignored).
    """
    values: Dict[str, Any] = {}
    if config_path:
        values.update(load_config_file(config_path))
    known = {f.name for f in fields(SuiteConfig)}
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in known:
            raise ConfigError(f"unknown setting {name!r}")
        values[name] = coerce_value(name, value)
    return SuiteConfig(**values).validate()


def setup_logging(log_file: Optional[str] = None, level: Optional[str] = None) -> logging.Logger:
    """Log to a file and to stdout with timestamps."""
    log_file = log_file or LOG_FILE
    directory = os.path.dirname(log_file)
    if directory:
        os.makedirs(directory, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stdout),
        ],
        force=True,
    )
    return logging.getLogger("thinsvd")
