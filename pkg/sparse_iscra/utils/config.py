"""
Solver Configuration Loader Module

Centralized access to the numeric defaults of every solver, diagnostic and
sweep. Values are loaded from config/solver_config.json and merged over the
built-in DEFAULT_CONFIG, so a partial file only overrides what it names.

Features:
    - Load configuration from JSON file
    - Deep-merge user overrides (e.g. a --config file) over the defaults
    - Fallback to default configuration if file not found or malformed
    - Cache configuration for repeated lookups
    - Resolve dataset paths against SPARSE_ISCRA_DATA_DIR

Configuration File:
    Location: config/solver_config.json
    Format:
        {
            "iscra": {"mu": 1000.0, "rho": 0.2, ...},
            "ssnal": {"sigma0": 1.0, "sigma_factor": 5.0, ...},
            "baselines": {"scad_a": 3.7, ...},
            "analysis": {"sigma_budget": 2000000, ...},
            "sweep": {"workers": 1, ...},
            "data": {"poly_max_columns": 5000000}
        }

Usage:
    from sparse_iscra.utils.config import get_section, load_solver_config

    ssnal_defaults = get_section("ssnal")
    config = load_solver_config(override_path="my_run.json")
"""

import copy
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .console import Fore, print_colored
from .json_utils import load_json

BASE_DIR = Path(__file__).resolve().parent.parent.parent
CONFIG_FILE = BASE_DIR / "config" / "solver_config.json"
DATA_DIR_ENV = "SPARSE_ISCRA_DATA_DIR"

# Cache for loaded configuration
_config_cache: Optional[Dict[str, Any]] = None

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "iscra": {
        "mu": 1e3,
        "rho": 0.2,
        "epsilon": 0.0,
        "inner_tolerance": 1e-6,
        "max_outer": 50,
        "rel_change_tol": 1e-3,
        "termination": "both",
        "c_lambda": 10.0,
    },
    "ssnal": {
        "sigma0": 1.0,
        "sigma_factor": 5.0,
        "sigma_max": 1e8,
        "max_outer": 200,
        "max_newton": 50,
        "max_cg": 200,
        "armijo": 1e-4,
        "step_floor": 1e-12,
        "direct_solve_max": 1500,
        "linear_solver": "auto",
    },
    "baselines": {
        "scad_a": 3.7,
        "mcp_a": 3.0,
        "tl1_a": 1.0,
        "tl1_c": 1e-8,
        "rel_change_tol": 1e-3,
        "max_outer": 50,
        "x0_policy": "lasso",
    },
    "analysis": {
        "sigma_budget": 2_000_000,
        "kappa_budget": 65_536,
        "witness_budget": 2000,
        "spectral_rtol": 1e-10,
    },
    "sweep": {
        "workers": 1,
        "seeds": 10,
        "base_seed": 0,
    },
    "data": {
        "poly_max_columns": 5_000_000,
    },
}


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deep-merge two configuration dictionaries.

    Args:
        base: Configuration providing the defaults (not modified)
        override: Values that win over base; nested dicts merge key by key

    Returns:
        Dict: A new merged dictionary
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_json(path: Path) -> Dict[str, Any]:
    data = load_json(path)
    if not isinstance(data, dict):
        raise ValueError(f"top-level JSON value in {path} must be an object")
    return data


def load_solver_config(force_reload: bool = False, override_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load solver configuration from JSON file.

    Uses caching to avoid repeated file reads. Falls back to DEFAULT_CONFIG
    if the file doesn't exist or is malformed.

    Args:
        force_reload: If True, bypass cache and reload from file
        override_path: Optional user JSON file merged on top (not cached)

    Returns:
        Dict: Configuration with one sub-dictionary per section

    Note:
        - Missing file: yellow notice, defaults used
        - Parse error: red notice, defaults used
        - A broken override file is reported and ignored
    """
    global _config_cache

    if _config_cache is None or force_reload:
        if not CONFIG_FILE.exists():
            print_colored(
                f"Solver config not found at {CONFIG_FILE}. Using defaults.",
                Fore.YELLOW
            )
            _config_cache = copy.deepcopy(DEFAULT_CONFIG)
        else:
            try:
                _config_cache = merge_config(DEFAULT_CONFIG, _read_json(CONFIG_FILE))
            except Exception as e:
                print_colored(
                    f"Error loading solver config: {e}. Using defaults.",
                    Fore.RED
                )
                _config_cache = copy.deepcopy(DEFAULT_CONFIG)

    if override_path is None:
        return _config_cache

    try:
        return merge_config(_config_cache, _read_json(Path(override_path)))
    except Exception as e:
        print_colored(f"Error loading config override {override_path}: {e}. Ignoring it.", Fore.RED)
        return _config_cache


def get_section(name: str, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Get one configuration section, e.g. "ssnal".

    Args:
        name: Section name
        config: Already-loaded configuration (loads the cached one if omitted)

    Returns:
        Dict: The section merged over its defaults
    """
    config = config if config is not None else load_solver_config()
    return merge_config(DEFAULT_CONFIG.get(name, {}), config.get(name, {}))


def resolve_data_path(path: Union[str, Path]) -> Path:
    """
    Resolve a dataset path.

    Absolute paths and paths that exist relative to the working directory are
    returned unchanged; other relative paths are looked up under the
    directory named by SPARSE_ISCRA_DATA_DIR when it is set.

    Example:
        # SPARSE_ISCRA_DATA_DIR=/data/libsvm
        resolve_data_path("mpg.txt")   # -> /data/libsvm/mpg.txt
    """
    candidate = Path(path)
    if candidate.is_absolute() or candidate.exists():
        return candidate
    data_dir = os.environ.get(DATA_DIR_ENV)
    if data_dir:
        return Path(data_dir) / candidate
    return candidate


def reload_config() -> None:
    """Clear the configuration cache so the next load re-reads the file."""
    global _config_cache
    _config_cache = None
