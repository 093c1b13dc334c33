"""Declarative run configuration.

A config file is YAML: top-level keys apply to every command, and a block
named after a command holds that command's settings::

    seed: 13
    clean:
      stages: [lid, script, offensive, punctuation, dedup]
      lid_model: models/lid.json
      blacklists: {hi: blacklists/hi.txt}

Command-line flags take precedence over the block, the block over top-level
keys, and those over built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .filters import ConfigError

ENV_VAR = "CORPUS_FORGE_CONFIG"


@dataclass
class PipelineConfig:
    command: str
    values: dict[str, Any] = field(default_factory=dict)
    path: Path | None = None

    @classmethod
    def load(cls, command: str, path: str | Path | None = None) -> PipelineConfig:
        if path is None:
            env = os.environ.get(ENV_VAR)
            if not env:
                return cls(command)
            path = env
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping")
        merged = {k: v for k, v in data.items() if not isinstance(v, dict) or k in ("blacklists",)}
        block = data.get(command) or {}
        if not isinstance(block, dict):
            raise ConfigError(f"config block {command!r} must be a mapping")
        merged.update(block)
        return cls(command, merged, path)

    def resolve(self, key: str, flag: Any, default: Any = None) -> Any:
        if flag is not None:
            return flag
        return self.values.get(key, default)

    def path_value(self, key: str, flag: Any, must_exist: bool = True) -> Path | None:
        """A path setting, resolved relative to the config file when it came from there."""
        if flag is not None:
            p = Path(flag)
        elif key in self.values and self.values[key] is not None:
            p = Path(self.values[key])
            if self.path is not None and not p.is_absolute():
                p = self.path.parent / p
        else:
            return None
        if must_exist and not p.exists():
            raise ConfigError(f"{key}: {p} does not exist")
        return p

    def relative(self, value: str) -> Path:
        p = Path(value)
        if self.path is not None and not p.is_absolute():
            p = self.path.parent / p
        return p
