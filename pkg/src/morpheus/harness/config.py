"""Scenario files: a YAML mapping whose keys are the fields of :class:`ScenarioConfig`."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import yaml

from ..config import ConfigInvalid, ScenarioConfig


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as e:
        raise ConfigInvalid(f"{path}: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigInvalid(f"{path}: expected a mapping at top level")
    return ScenarioConfig.from_dict(data or {})


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
