"""Run configuration: TOML config files, flag overrides and seed derivation.

Precedence is defaults < config file < command-line flags. All randomness in
a run flows from one root seed; subsystems get child seeds derived by label,
so adding parallelism or reordering stages never changes results.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


DEFAULT_SEED = 13


def load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def derive_seed(root_seed: int, label: str) -> int:
    """Stable 63-bit child seed for a named subsystem."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


class Resolver:
    """Option lookup for one subcommand section of the config file."""

    def __init__(self, file_cfg: Mapping, section: str):
        self._top = file_cfg
        self._section = file_cfg.get(section, {})

    def get(self, key: str, flag_value: Any, default: Any) -> Any:
        if flag_value is not None:
            return flag_value
        if key in self._section:
            return self._section[key]
        if key in self._top and not isinstance(self._top[key], Mapping):
            return self._top[key]
        return default


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options for one run, embedded in every run summary."""

    command: str
    version: str
    options: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "version": self.version,
            "config": self.options,
        }
