"""Registration of edited images against their captured scene."""

import json

from ._editreg import (
    Error,
    collides,
    convex_hull,
    default_config,
    filter_grasps,
    generate_scene,
    hierarchical_filter,
    load_scene,
    read_cloud,
    relative_transform,
    spatial_filter,
    to_world,
    umeyama,
    write_cloud,
)
from ._editreg import run_pipeline as _run_pipeline

__all__ = [
    "Error",
    "collides",
    "convex_hull",
    "default_config",
    "filter_grasps",
    "generate_scene",
    "hierarchical_filter",
    "load_scene",
    "read_cloud",
    "relative_transform",
    "run_pipeline",
    "spatial_filter",
    "to_world",
    "umeyama",
    "write_cloud",
]


def run_pipeline(obs, edit, config=None):
    """Run every stage on two scene archives and return the parsed report.

    `config` may be a dict or JSON text with the same keys as the CLI config file.
    """
    if isinstance(config, dict):
        config = json.dumps(config)
    return json.loads(_run_pipeline(str(obs), str(edit), config))
