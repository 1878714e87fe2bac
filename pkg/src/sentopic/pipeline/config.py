"""Pipeline configuration: defaults, key-value file loading and validation."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from ..errors import ConfigError
from ..stats import DEFAULT_SIZES

ENGINES = ("compound", "difference", "auto")


@dataclass
class PipelineConfig:
    input: str | None = None
    out_dir: str = "out"
    stopwords: str | None = None
    valence_lexicon: str | None = None
    positive_words: str | None = None
    negative_words: str | None = None
    engine: str = "compound"
    gold: str | None = None
    topic_labels: str | None = None
    keep_apostrophes: bool = True
    min_tokens: int = 5

    topics: int = 26
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 4000
    top_n: int = 10

    sweep: bool = False
    sweep_min: int = 2
    sweep_max: int = 100
    sweep_iterations: int = 500
    coherence_window: int = 110

    robustness_runs: int = 0
    robustness_threshold: float = 0.01

    sizes: tuple[int, ...] = DEFAULT_SIZES
    repeats: int = 1
    equal_var: bool = False
    round_alpha: bool = False
    top_k: int = 5

    seed: int = 0
    threads: int = 1

    def validate(self, need_input: bool = True) -> "PipelineConfig":
        if need_input:
            if not self.input:
                raise ConfigError("no input file given")
            if not Path(self.input).is_file():
                raise ConfigError(f"input file not found: {self.input}")
        for name in ("stopwords", "valence_lexicon", "positive_words", "negative_words", "gold", "topic_labels"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.engine == "auto" and self.gold is None:
            raise ConfigError("engine=auto needs a gold label file")
        if self.topics < 1 or self.iterations < 1 or self.sweep_iterations < 1:
            raise ConfigError("topics and iteration counts must be positive")
        if self.sweep and not 1 <= self.sweep_min <= self.sweep_max:
            raise ConfigError("sweep range must satisfy 1 <= sweep_min <= sweep_max")
        if self.robustness_runs == 1 or self.robustness_runs < 0:
            raise ConfigError("robustness_runs must be 0 (off) or at least 2")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.repeats < 1 or self.threads < 1 or self.top_k < 1 or self.min_tokens < 0:
            raise ConfigError("repeats, threads and top_k must be positive")
        if not self.sizes or any(s < 2 for s in self.sizes):
            raise ConfigError("stratification sizes must all be >= 2")
        return self

    def snapshot(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["sizes"] = list(self.sizes)
        return out


def _coerce(f: dataclasses.Field, raw: str):
    text = raw.strip()
    kind = str(f.type)
    if text.lower() in ("", "none", "null") and "None" in kind:
        return None
    try:
        if kind.startswith("bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
        if kind.startswith("tuple"):
            return tuple(int(s) for s in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"config key {f.name}: cannot parse {raw!r}") from exc
    return text


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read ``key = value`` lines; a ``[pipeline]`` header is optional.

    Relative paths resolve against the config file's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        if not text.lstrip().startswith("["):
            text = "[pipeline]\n" + text
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if not parser.has_section("pipeline"):
        raise ConfigError(f"{path}: missing [pipeline] section")
    known = {f.name: f for f in fields(PipelineConfig)}
    values = dataclasses.asdict(base) if base else {}
    for key, raw in parser.items("pipeline"):
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        value = _coerce(known[key], raw)
        if key in _PATH_KEYS and value is not None and not Path(value).is_absolute():
            value = str((path.parent / value).resolve())
        values[key] = value
    return PipelineConfig(**values)


_PATH_KEYS = {"input", "out_dir", "stopwords", "valence_lexicon", "positive_words", "negative_words",
              "gold", "topic_labels"}
