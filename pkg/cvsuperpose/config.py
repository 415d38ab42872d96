"""
Configuration for cvsuperpose runs.

Defaults come from the environment (a local .env file is loaded on import),
can be overridden by a key=value config file, and finally by command-line
flags.

Environment variables:
    CVSUP_N_MAX        default Fock cutoff per mode (60)
    CVSUP_TAIL_TOL     acceptable truncated probability mass (1e-12)
    CVSUP_ZERO_TOL     zero-state threshold on norm^2 (1e-14)
    CVSUP_AUTO_GROW    grow the cutoff when the tail is too heavy (true)
    CVSUP_QUAD_ORDER   Gauss-Hermite order per axis (40)
    CVSUP_GRID         grid density "S" or "SxR" (51x101)
    CVSUP_S_MAX        upper end of squeezing sweeps (1.0)
    CVSUP_OUT_DIR      output directory for CSV files (results)
    CVSUP_WORKERS      worker processes for sweeps (1)
"""

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

# Load environment variables
load_dotenv()

# Configuration
DEFAULT_N_MAX = int(os.getenv("CVSUP_N_MAX", "60"))
DEFAULT_TAIL_TOL = float(os.getenv("CVSUP_TAIL_TOL", "1e-12"))
DEFAULT_ZERO_TOL = float(os.getenv("CVSUP_ZERO_TOL", "1e-14"))
DEFAULT_AUTO_GROW = os.getenv("CVSUP_AUTO_GROW", "true").strip().lower() in ("1", "true", "yes", "on")
DEFAULT_QUAD_ORDER = int(os.getenv("CVSUP_QUAD_ORDER", "40"))
DEFAULT_GRID = os.getenv("CVSUP_GRID", "51x101")
DEFAULT_S_MAX = float(os.getenv("CVSUP_S_MAX", "1.0"))
DEFAULT_OUT_DIR = os.getenv("CVSUP_OUT_DIR", "results")
DEFAULT_WORKERS = int(os.getenv("CVSUP_WORKERS", "1"))

# Keys accepted in a --config file, mapped to RunConfig field names
CONFIG_FILE_KEYS = {
    "n_max": "n_max",
    "tail_tol": "tail_tol",
    "auto_grow": "auto_grow",
    "quad_order": "quadrature_order",
    "quadrature_order": "quadrature_order",
    "grid": "grid",
    "s_max": "s_max",
    "out_dir": "out_dir",
    "workers": "workers",
}


def parse_grid(spec: str) -> Tuple[int, int]:
    """
    Parse a grid density string.

    Args:
        spec: "S" (same density for s and r) or "SxR", e.g. "101x101"

    Returns:
        (points along s, points along r)
    """
    parts = str(spec).lower().replace(" ", "").split("x")
    if len(parts) == 1:
        n = int(parts[0])
        return n, n
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise ValueError(f"invalid grid spec: {spec!r}")


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"invalid boolean: {value!r}")


@dataclass
class RunConfig:
    """Settings shared by every command-line run."""

    n_max: int = DEFAULT_N_MAX
    tail_tol: float = DEFAULT_TAIL_TOL
    auto_grow: bool = DEFAULT_AUTO_GROW
    quadrature_order: int = DEFAULT_QUAD_ORDER
    grid_s: int = field(default_factory=lambda: parse_grid(DEFAULT_GRID)[0])
    grid_r: int = field(default_factory=lambda: parse_grid(DEFAULT_GRID)[1])
    s_max: float = DEFAULT_S_MAX
    out_dir: str = DEFAULT_OUT_DIR
    workers: int = DEFAULT_WORKERS

    def validate(self) -> "RunConfig":
        """Check invariants and return self."""
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")
        if self.quadrature_order < 2:
            raise ValueError(f"quadrature order must be >= 2, got {self.quadrature_order}")
        if self.grid_s < 2 or self.grid_r < 2:
            raise ValueError(f"grid densities must be >= 2, got {self.grid_s}x{self.grid_r}")
        if not self.s_max > 0:
            raise ValueError(f"s_max must be positive, got {self.s_max}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        return self

    def ensure_out_dir(self) -> Path:
        """Create the output directory and verify it is writable."""
        path = Path(self.out_dir)
        path.mkdir(parents=True, exist_ok=True)
        if not os.access(path, os.W_OK):
            raise ValueError(f"output directory not writable: {path}")
        return path

    def policy(self):
        """Truncation policy for fock_core built from these settings."""
        from cvsuperpose.fock_core import TruncationPolicy

        return TruncationPolicy(n_max=self.n_max, tail_tol=self.tail_tol, auto_grow=self.auto_grow)


def _coerce(name: str, value) -> Dict:
    """Convert a raw config value to the RunConfig field(s) it sets."""
    if name == "grid":
        grid_s, grid_r = parse_grid(value)
        return {"grid_s": grid_s, "grid_r": grid_r}
    if name in ("n_max", "quadrature_order", "workers"):
        return {name: int(value)}
    if name in ("tail_tol", "s_max"):
        return {name: float(value)}
    if name == "auto_grow":
        return {name: _parse_bool(value)}
    return {name: str(value)}


def read_config_file(path: str) -> Dict:
    """
    Read a key=value config file.

    Args:
        path: Path to the file (dotenv syntax, comments allowed)

    Returns:
        RunConfig field overrides
    """
    if not Path(path).is_file():
        raise ValueError(f"config file not found: {path}")

    overrides = {}
    for key, value in dotenv_values(path).items():
        name = CONFIG_FILE_KEYS.get(key.strip().lower())
        if name is None:
            raise ValueError(f"unknown config key {key!r} in {path}")
        if value is None:
            raise ValueError(f"config key {key!r} has no value in {path}")
        overrides.update(_coerce(name, value))
    return overrides


def load_run_config(config_file: Optional[str] = None, **flags) -> RunConfig:
    """
    Build a validated RunConfig.

    Args:
        config_file: Optional key=value file; its values beat the environment
        **flags: Command-line values (None means "not given"); these win

    Returns:
        RunConfig
    """
    config = RunConfig()

    if config_file:
        config = replace(config, **read_config_file(config_file))

    known = {f.name for f in fields(RunConfig)} | {"grid"}
    overrides = {}
    for name, value in flags.items():
        if value is None:
            continue
        if name not in known:
            raise ValueError(f"unknown setting: {name}")
        overrides.update(_coerce(name, value))

    return replace(config, **overrides).validate()
