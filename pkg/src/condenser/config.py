"""Pipeline configuration: token budget, classifier thresholds, stoplist.

Every key in a key=value config file has a matching CLI flag; the CLI layer
merges file values first, then flag overrides.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

DEFAULT_BUDGET = 1024
DEFAULT_TARGET_TOKENS = 128


class ConfigError(Exception):
    pass


def load_stoplist(path: str | Path) -> frozenset[str]:
    """One lowercase word per line; '#' starts a comment."""
    words: set[str] = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if " " in line or "\t" in line:
            raise ConfigError(f"stoplist entries must be single words, got {line!r}")
        words.add(line.lower())
    return frozenset(words)


def default_stoplist() -> frozenset[str]:
    ref = resources.files("condenser").joinpath("data/stoplist.txt")
    words: set[str] = set()
    for raw in ref.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class PipelineConfig:
    budget: int = DEFAULT_BUDGET
    target_tokens: int = DEFAULT_TARGET_TOKENS
    # change-type classifier thresholds
    small_change_max_statements: int = 2
    large_change_min_methods: int = 8
    large_change_min_classes: int = 2
    accessor_ratio: float = 0.5
    external_call_ratio: float = 0.5
    # statement modify pairing
    modify_similarity: float = 0.6
    # identifier filtering
    min_identifier_length: int = 2
    stoplist: frozenset[str] = field(default_factory=default_stoplist)
    # pipeline execution
    jobs: int = 1
    # generation endpoint
    endpoint: str | None = None
    max_new_tokens: int = 128
    temperature: float = 0.0
    attempts: int = 3
    backoff_base: float = 0.5
    timeout: float = 30.0
    prompt_field: str = "prompt"
    completion_field: str = "completion"

    def validate(self) -> None:
        if self.budget < 64:
            raise ConfigError(f"budget must be >= 64, got {self.budget}")
        if self.attempts < 1:
            raise ConfigError("attempts must be >= 1")
        if not (0.0 <= self.modify_similarity <= 1.0):
            raise ConfigError("modify_similarity must be in [0, 1]")


_INT_KEYS = {
    "budget", "target_tokens", "small_change_max_statements",
    "large_change_min_methods", "large_change_min_classes",
    "min_identifier_length", "jobs", "max_new_tokens", "attempts",
}
_FLOAT_KEYS = {
    "accessor_ratio", "external_call_ratio", "modify_similarity",
    "temperature", "backoff_base", "timeout",
}
_STR_KEYS = {"endpoint", "prompt_field", "completion_field"}


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse a key=value config file on top of a base configuration."""
    cfg = base or PipelineConfig()
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "stoplist":
            overrides["stoplist"] = load_stoplist(value)
        elif key in _INT_KEYS:
            overrides[key] = int(value)
        elif key in _FLOAT_KEYS:
            overrides[key] = float(value)
        elif key in _STR_KEYS:
            overrides[key] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg
