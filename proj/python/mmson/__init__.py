"""mmWave self-organizing network simulator: FLOC clustering and Q-learning power allocation."""

import json
from typing import Optional

from ._core import (
    ConfigError,
    ConvergenceError,
    Error,
    StageError,
    capacity,
    default_config,
    jain_index,
    normalize_config,
    pathloss_friis_db,
    pathloss_nlos_db,
    report,
    reward_cdpq,
    reward_expq,
)
from . import _core

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "Error",
    "StageError",
    "capacity",
    "cluster",
    "default_config",
    "deploy",
    "jain_index",
    "normalize_config",
    "pathloss_friis_db",
    "pathloss_nlos_db",
    "report",
    "reward_cdpq",
    "reward_expq",
    "run_pipeline",
    "sweep",
    "verify",
]


def _text(config: Optional[str]) -> str:
    return config if config is not None else ""


def deploy(seed: int, config: Optional[str] = None) -> dict:
    """Draws a Poisson deployment; returns the layout as a dict."""
    return json.loads(_core.deploy_json(_text(config), seed))


def cluster(layout: dict, seed: int, config: Optional[str] = None) -> dict:
    """Runs FLOC on a layout dict; returns the cluster assignment as a dict."""
    return json.loads(_core.cluster_json(_text(config), json.dumps(layout), seed))


def verify(assignment: dict, layout: dict, config: Optional[str] = None) -> list:
    """Invariant violations of an assignment, one string per violation."""
    return _core.verify_json(_text(config), json.dumps(assignment), json.dumps(layout))


def run_pipeline(out_dir: str, seed: int = 1, config: Optional[str] = None) -> dict:
    """deploy -> cluster -> train -> evaluate into out_dir; returns the summary."""
    _core.run_pipeline(_text(config), seed, str(out_dir))
    with open(f"{out_dir}/summary.json") as f:
        return json.load(f)


def sweep(out_dir: str, config: Optional[str] = None) -> str:
    """Cluster-size sweep into out_dir; returns the comparison table."""
    _core.sweep(_text(config), str(out_dir))
    return report(str(out_dir))
