"""Run configuration: a YAML file with one section per component, overridable from the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .clustering import ClusterConfig
from .errors import ConfigError, IoError
from .features import FeatureConfig
from .ingestion import AckConfig, QuestionDetectorConfig
from .kde import BandwidthConfig
from .synthgen import GenConfig

SECTIONS = {
    "features": FeatureConfig,
    "cluster": ClusterConfig,
    "bandwidth": BandwidthConfig,
    "detector": QuestionDetectorConfig,
    "ack": AckConfig,
    "gen": GenConfig,
}
PATH_KEYS = ("feed", "questions", "gold", "output")


@dataclass(frozen=True)
class RunConfig:
    features: FeatureConfig = FeatureConfig()
    cluster: ClusterConfig = ClusterConfig()
    bandwidth: BandwidthConfig = BandwidthConfig()
    detector: QuestionDetectorConfig = QuestionDetectorConfig()
    ack: AckConfig = AckConfig()
    gen: GenConfig = GenConfig()
    paths: dict = field(default_factory=dict)

    def with_overrides(self, *, seed=None, window=None, max_iters=None, feature_set=None) -> "RunConfig":
        cfg = self
        try:
            if seed is not None:
                cfg = replace(
                    cfg,
                    cluster=replace(cfg.cluster, rng_seed=seed),
                    bandwidth=replace(cfg.bandwidth, rng_seed=seed),
                    gen=replace(cfg.gen, rng_seed=seed),
                )
            if window is not None:
                cfg = replace(
                    cfg,
                    cluster=replace(cfg.cluster, window_w=window),
                    features=replace(cfg.features, window_w=window),
                    gen=replace(cfg.gen, window_w=window),
                )
            if max_iters is not None:
                cfg = replace(cfg, cluster=replace(cfg.cluster, max_iters=max_iters))
            if feature_set is not None:
                cfg = replace(cfg, features=replace(cfg.features, feature_set=feature_set))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for name in SECTIONS:
            section = dataclasses.asdict(getattr(self, name))
            out[name] = {k: _plain(v) for k, v in section.items()}
        out["paths"] = dict(self.paths)
        return out


def _plain(value):
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def _build_section(name, cls, values: dict):
    if not isinstance(values, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in section {name!r}: {', '.join(unknown)}")
    kwargs = {}
    for key, value in values.items():
        if name == "cluster" and key == "ack":
            kwargs[key] = _build_section("cluster.ack", AckConfig, value)
        elif key == "lexicon" and name == "detector":
            kwargs[key] = frozenset(value)
        elif key in ("lexicon", "answers_per_question"):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section {name!r}: {exc}") from exc


def config_from_dict(data: dict | None) -> RunConfig:
    data = dict(data or {})
    unknown = sorted(set(data) - set(SECTIONS) - {"paths", "seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    kwargs = {name: _build_section(name, cls, data[name]) for name, cls in SECTIONS.items() if name in data}
    paths = data.get("paths") or {}
    if not isinstance(paths, dict) or set(paths) - set(PATH_KEYS):
        raise ConfigError(f"'paths' may only contain {', '.join(PATH_KEYS)}")
    cfg = RunConfig(**kwargs, paths=dict(paths))
    # ack settings live in one place for the CLI; keep the clustering copy in sync
    if "ack" in data and not (isinstance(data.get("cluster"), dict) and "ack" in data["cluster"]):
        cfg = replace(cfg, cluster=replace(cfg.cluster, ack=cfg.ack))
    if "seed" in data:
        cfg = cfg.with_overrides(seed=int(data["seed"]))
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)
