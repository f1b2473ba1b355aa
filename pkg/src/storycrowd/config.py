"""Plain ``key = value`` configuration for the service and simulator.

The config path comes from, in increasing precedence: built-in default,
the HG_CONFIG environment variable, the --config CLI flag.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import ConfigError

ENV_VAR = "HG_CONFIG"
DEFAULT_PATH = "storycrowd.conf"


def parse_kv_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return out


@dataclass
class Config:
    time_lock_seconds: float = 30.0
    min_idea_words: int = 50
    per_character_quota: int = 3
    copy_overlap_tokens: int = 15
    duplicate_distance_threshold: float = 0.05
    embedding_path: str = ""
    sidecar_path: str = ""
    listen_address: str = "127.0.0.1:8080"
    data_dir: str = "data"
    writer_key: str = ""

    def validate(self) -> None:
        for name in ("time_lock_seconds", "min_idea_words", "per_character_quota",
                     "copy_overlap_tokens", "duplicate_distance_threshold"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not self.writer_key:
            raise ConfigError("writer_key is required")
        if not self.embedding_path:
            raise ConfigError("embedding_path is required")
        if not os.path.isfile(self.embedding_path):
            raise ConfigError(f"embedding file not found: {self.embedding_path}")
        if self.sidecar_path and not os.path.isfile(self.sidecar_path):
            raise ConfigError(f"sidecar file not found: {self.sidecar_path}")

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])


def load_config(path: str | None = None) -> Config:
    """Resolve the config path (flag > env > default) and parse it."""
    path = path or os.environ.get(ENV_VAR) or DEFAULT_PATH
    raw = parse_kv_file(path)
    cfg = Config()
    known = {f.name: f.type for f in fields(Config)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
        current = getattr(cfg, key)
        try:
            if isinstance(current, float):
                setattr(cfg, key, float(value))
            elif isinstance(current, int):
                setattr(cfg, key, int(value))
            else:
                setattr(cfg, key, value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}")
    cfg.validate()
    return cfg
