"""Experiment configuration: defaults, JSON file overlay, command-line overrides."""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

from .channel import ArrayConfig, SubcarrierGrid
from .learning.svm import SvmParams

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]

FAMILIES = ("tdl", "cdl", "both")
CHANNEL_SAMPLING = ("static", "independent")
ESTIMATORS = ("scalar", "matrix")


class ConfigError(ValueError):
    """Invalid configuration key or value."""


@dataclass(frozen=True)
class ExperimentConfig:
    carrier_freq: float = 4e9
    subcarrier_count: int = 600
    subcarrier_spacing: float = 30e3
    delay_spread: float = 300e-9
    family: str = "both"
    samples_per_class: int = 50
    snr_list_db: tuple[float, ...] = (0.0, 10.0, 20.0)
    split_fraction: float = 0.7
    svm: SvmParams = field(default_factory=SvmParams)
    array_config: ArrayConfig = field(default_factory=ArrayConfig)
    master_seed: int = 0
    repetitions: int = 10
    # "static": one channel draw per (profile, repetition) observed through fresh
    # pilots and noise; "independent": a new channel draw for every sample
    channel_sampling: str = "static"
    estimator: str = "scalar"
    profiles_path: str | None = None

    def __post_init__(self):
        check = [
            ("carrier_freq", self.carrier_freq > 0),
            ("subcarrier_count", self.subcarrier_count >= 1),
            ("subcarrier_spacing", self.subcarrier_spacing > 0),
            ("delay_spread", self.delay_spread > 0),
            ("family", self.family in FAMILIES),
            ("samples_per_class", self.samples_per_class >= 4),
            ("snr_list_db", len(self.snr_list_db) > 0 and all(math.isfinite(s) for s in self.snr_list_db)),
            ("split_fraction", 0 < self.split_fraction < 1),
            ("repetitions", self.repetitions >= 1),
            ("channel_sampling", self.channel_sampling in CHANNEL_SAMPLING),
            ("estimator", self.estimator in ESTIMATORS),
        ]
        for key, ok in check:
            if not ok:
                raise ConfigError(f"invalid value for {key}: {getattr(self, key)!r}")

    @property
    def grid(self) -> SubcarrierGrid:
        return SubcarrierGrid(self.subcarrier_count, self.subcarrier_spacing, self.carrier_freq)

    @property
    def families(self) -> tuple[str, ...]:
        return ("tdl", "cdl") if self.family == "both" else (self.family,)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr_list_db"] = list(self.snr_list_db)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        return _build(cls, data, "")


_NESTED = {"svm": SvmParams, "array_config": ArrayConfig}


def _build(cls, data: Mapping[str, Any], prefix: str):
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown config key {prefix + key!r}")
        if key in _NESTED:
            if not isinstance(value, Mapping):
                raise ConfigError(f"config key {prefix + key!r} must be an object")
            value = _build(_NESTED[key], value, prefix + key + ".")
        elif key == "snr_list_db":
            if not isinstance(value, (list, tuple)):
                value = [value]
            value = tuple(float(v) for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix or 'config'}: {exc}") from None


def _merge(base: dict, overlay: Mapping[str, Any]) -> dict:
    out = dict(base)
    for key, value in overlay.items():
        if key in _NESTED and isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _expand_dotted(overrides: Mapping[str, Any]) -> dict:
    out: dict = {}
    for key, value in overrides.items():
        head, _, tail = key.partition(".")
        if tail:
            out.setdefault(head, {})[tail] = value
        else:
            out[key] = value
    return out


def load_config(path: str | os.PathLike | None = None,
                overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Defaults, overlaid by the JSON file at ``path``, overlaid by ``overrides``.

    Override keys may address nested fields with dots (``svm.C``).
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: top level must be an object")
    if overrides:
        data = _merge(data, _expand_dotted(overrides))
    return ExperimentConfig.from_dict(data)
