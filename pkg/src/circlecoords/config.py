"""Run configuration: nested dataclasses loadable from YAML with dotted overrides."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml


@dataclass
class InputConfig:
    # exactly one of `generator` / `csv` must be set
    generator: str | None = "circle"  # circle | ellipse | limit_cycle
    csv: str | None = None
    kind: str = "cloud"  # cloud | timeseries (CSV only)
    truth_column: str | None = None
    n: int = 1000
    dispersion: float = 1.3
    radius_mean: float = 1.0
    radius_sd: float = 0.1
    dilation: float = 1.6
    # time-series preprocessing
    frames: int = 960
    rate: float = 4.0
    period: float = 80.0
    skew: float = 0.6
    noise: float = 0.1
    detrend_window: int | None = 120
    delay_dim: int = 4
    delay_lag: int = 20
    pca_dim: int | None = 5


@dataclass
class SamplingConfig:
    bandwidth: float | None = None  # None: Scott's rule
    intrinsic_dim: int | None = None  # None: ambient dimension
    n_subsamples: int = 30
    target_size: float = 50.0


@dataclass
class PersistenceConfig:
    max_scale: str | float = "auto"  # auto | enclosing | <number>
    max_scale_cap: float | None = None
    triangle_cap: int = 3_000_000
    primes: tuple = (47, 53, 59)
    scale_fraction: float = 0.5
    small_factor: float = 2.0
    multiplicity_fraction: float = 0.5


@dataclass
class AlignmentConfig:
    kernel_rate: float | None = None  # None: 1 / bandwidth**2
    rate0: float = 0.1
    tol: float = 1e-8
    max_iter: int = 1000


@dataclass
class EvaluationConfig:
    ks: tuple = (3,)
    replicates: int = 20


@dataclass
class PipelineConfig:
    input: InputConfig = field(default_factory=InputConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    persistence: PersistenceConfig = field(default_factory=PersistenceConfig)
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    seed: int = 0
    workers: int = 1
    output_dir: str = "out"

    def validate(self) -> "PipelineConfig":
        inp = self.input
        if (inp.generator is None) == (inp.csv is None):
            raise ValueError("set exactly one of input.generator and input.csv")
        if inp.generator not in (None, "circle", "ellipse", "limit_cycle"):
            raise ValueError(f"unknown generator {inp.generator!r}")
        if inp.kind not in ("cloud", "timeseries"):
            raise ValueError("input.kind must be 'cloud' or 'timeseries'")
        s = self.sampling
        if s.n_subsamples < 1 or s.target_size <= 0:
            raise ValueError("sampling.n_subsamples and sampling.target_size must be positive")
        if s.bandwidth is not None and s.bandwidth <= 0:
            raise ValueError("sampling.bandwidth must be positive")
        p = self.persistence
        if not 0 < p.scale_fraction < 1:
            raise ValueError("persistence.scale_fraction must lie in (0, 1)")
        if not p.primes:
            raise ValueError("persistence.primes is empty")
        if isinstance(p.max_scale, str) and p.max_scale not in ("auto", "enclosing"):
            raise ValueError("persistence.max_scale must be 'auto', 'enclosing' or a number")
        a = self.alignment
        if a.rate0 <= 0 or a.max_iter < 0 or a.tol < 0:
            raise ValueError("invalid hill-climb parameters")
        if a.kernel_rate is not None and a.kernel_rate <= 0:
            raise ValueError("alignment.kernel_rate must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        return self

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    @classmethod
    def from_dict(cls, data: dict | None) -> "PipelineConfig":
        return _build(cls, data or {}).validate()

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def override(self, assignments) -> "PipelineConfig":
        """Apply ``section.key=value`` strings (values parsed as YAML scalars)."""
        data = self.to_dict()
        for item in assignments:
            key, sep, raw = item.partition("=")
            if not sep:
                raise ValueError(f"override {item!r} is not of the form key=value")
            node = data
            parts = key.strip().split(".")
            for part in parts[:-1]:
                if part not in node or not isinstance(node[part], dict):
                    raise ValueError(f"unknown config section {part!r} in {key!r}")
                node = node[part]
            if parts[-1] not in node:
                raise ValueError(f"unknown config key {key!r}")
            node[parts[-1]] = yaml.safe_load(raw)
        return PipelineConfig.from_dict(data)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _build(cls, data: dict):
    hints = typing.get_type_hints(cls)
    kwargs = {}
    names = {f.name for f in dataclasses.fields(cls)}
    for key, value in data.items():
        if key not in names:
            raise ValueError(f"unknown config key {key!r} for {cls.__name__}")
        hint = hints[key]
        if dataclasses.is_dataclass(hint):
            kwargs[key] = _build(hint, value or {})
        elif hint is tuple or typing.get_origin(hint) is tuple:
            kwargs[key] = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        else:
            kwargs[key] = value
    return cls(**kwargs)
