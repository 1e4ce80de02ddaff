"""Run configuration files: one file fully describes one experiment.

Configs are YAML or JSON with sections mirroring the component configs
(`train`, `fusion`, `cnn`, `mlm`) plus dataset/asset plumbing. Unset
training keys fall back to the per-dataset tuned defaults; unknown keys
are rejected with their full dotted path.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .cnn_branch import CnnConfig
from .errors import ConfigError
from .extractors import DEFAULT_EMOTION_MODEL, DEFAULT_SENTIMENT_MODEL
from .fusion import (
    TUNED_DEFAULTS,
    FusionConfig,
    TrainConfig,
    default_max_words,
    default_train_config,
)
from .sarc_encoder import DEFAULT_BASE_MODEL, MlmConfig


@dataclass
class AssetPaths:
    """Locations of pretrained inputs consumed by a run."""

    sarc_base: str = DEFAULT_BASE_MODEL
    emotion_model: str = DEFAULT_EMOTION_MODEL
    sentiment_model: str = DEFAULT_SENTIMENT_MODEL
    vector_file: str = None
    vector_dim: int = 300
    nbow_vector_file: str = None
    nbow_vector_dim: int = 100
    cache_dir: str = None


@dataclass
class RunConfig:
    """Everything one experiment run needs, resolvable offline."""

    dataset: str = "sarc_movies"
    data_path: str = None
    data_format: str = "jsonl"
    out_dir: str = "runs/latest"
    seed: int = 0
    assets: AssetPaths = field(default_factory=AssetPaths)
    train: TrainConfig = None
    fusion: FusionConfig = field(default_factory=FusionConfig)
    cnn: CnnConfig = None
    mlm: MlmConfig = None

    def to_dict(self):
        return dataclasses.asdict(self)


def _build_section(cls, data, path, defaults=None):
    """Instantiate a config dataclass from a dict, validating key names."""
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(
            f"unknown configuration key {unknown[0]!r}", key_path=f"{path}.{unknown[0]}"
        )
    merged = dict(defaults or {})
    merged.update(data)
    coerced = {}
    tuple_fields = {
        f.name for f in dataclasses.fields(cls) if isinstance(f.default, tuple)
    }
    for key, value in merged.items():
        if key in tuple_fields and isinstance(value, list):
            value = tuple(value)
        coerced[key] = value
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), key_path=path) from exc


def _parse_scalar(value):
    # Plain int/float first: YAML 1.1 would read "3e-4" as a string.
    text = value.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return yaml.safe_load(value)


def _parse_override(raw):
    if "=" not in raw:
        raise ConfigError(f"override must look like section.key=value, got {raw!r}")
    key, _, value = raw.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"override has an empty key: {raw!r}")
    try:
        parsed = _parse_scalar(value)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {value!r}: {exc}", key_path=key)
    return key, parsed


def apply_overrides(data: dict, overrides) -> dict:
    """Apply dotted-path overrides (`train.lr=2e-5`) to a raw config dict."""
    for raw in overrides:
        key, value = _parse_override(raw)
        parts = key.split(".")
        node = data
        for i, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(
                    "cannot descend into a non-section value",
                    key_path=".".join(parts[: i + 1]),
                )
            node = child
        node[parts[-1]] = value
    return data


def _read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    elif path.suffix in (".yaml", ".yml", ".cfg"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    else:
        raise ConfigError(f"unsupported config extension {path.suffix!r} ({path})")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping ({path})")
    return data


def build_run_config(data: dict) -> RunConfig:
    """Assemble a RunConfig from a raw nested dict."""
    top_known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - top_known)
    if unknown:
        raise ConfigError(f"unknown configuration key {unknown[0]!r}", key_path=unknown[0])

    dataset = data.get("dataset", "sarc_movies")
    seed = int(data.get("seed", 0))

    for section in ("assets", "train", "fusion", "cnn", "mlm"):
        value = data.get(section)
        if value is not None and not isinstance(value, dict):
            raise ConfigError("section must be a mapping", key_path=section)

    assets = _build_section(AssetPaths, data.get("assets") or {}, "assets")

    train_section = dict(data.get("train") or {})
    train_section.setdefault("seed", seed)
    if dataset in TUNED_DEFAULTS:
        train_defaults = dataclasses.asdict(default_train_config(dataset))
    else:
        train_defaults = None
    train = _build_section(TrainConfig, train_section, "train", defaults=train_defaults)

    fusion = _build_section(FusionConfig, data.get("fusion") or {}, "fusion")

    cnn_section = dict(data.get("cnn") or {})
    cnn_section.setdefault("embedding_dim", assets.vector_dim)
    cnn_section.setdefault("max_words", default_max_words(train.max_length))
    cnn = _build_section(CnnConfig, cnn_section, "cnn")

    mlm_section = dict(data.get("mlm") or {})
    mlm_section.setdefault("seed", seed)
    mlm = _build_section(MlmConfig, mlm_section, "mlm")

    return RunConfig(
        dataset=dataset,
        data_path=data.get("data_path"),
        data_format=data.get("data_format", "jsonl"),
        out_dir=data.get("out_dir", "runs/latest"),
        seed=seed,
        assets=assets,
        train=train,
        fusion=fusion,
        cnn=cnn,
        mlm=mlm,
    )


def load_run_config(path, overrides=()) -> RunConfig:
    """Read a config file, apply dotted overrides, validate, and build."""
    data = _read_config_file(path)
    apply_overrides(data, overrides)
    return build_run_config(data)
