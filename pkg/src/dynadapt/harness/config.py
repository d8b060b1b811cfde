"""
Experiment configuration in an INI-style key/value file::

    [experiment]
    algorithm = aod
    horizon = 512
    eta = auto

    [environment]
    kind = abrupt
    seed = 3
    segments = 4

    [comparator]
    policy = minimizers

    [output]
    trace = runs/aod.trace.csv
    report = runs/aod.report.csv
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..errors import ConfigError
from .environments import ENVIRONMENTS, EnvironmentSpec

ALGORITHMS = ("ogd", "ader", "aod", "aoa")
POLICIES = ("minimizers", "piecewise-constant", "file")


@dataclass
class ExperimentConfig:
    algorithm: str
    environment: str
    horizon: int
    seed: int = 0
    eta: Union[str, float] = "auto"
    dimension: int = 1
    segments: int = 4
    values: Optional[list[float]] = None
    change_points: Optional[list[int]] = None
    theta: Optional[list[float]] = None
    radius: float = 1.0
    policy: str = "minimizers"
    comparator_file: Optional[str] = None
    trace: Optional[str] = None
    report: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
        if self.environment not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment {self.environment!r}; expected one of {', '.join(ENVIRONMENTS)}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown comparator policy {self.policy!r}")
        if self.policy == "file" and not self.comparator_file:
            raise ConfigError("comparator policy 'file' needs comparator_file")
        if int(self.horizon) < 1:
            raise ConfigError("horizon must be >= 1")
        if self.eta != "auto":
            try:
                self.eta = float(self.eta)
            except (TypeError, ValueError):
                raise ConfigError(f"eta must be 'auto' or a number, got {self.eta!r}") from None
            if not self.eta > 0:
                raise ConfigError("eta must be positive")
            if self.algorithm != "ogd":
                raise ConfigError("eta only applies to --algorithm ogd")

    def environment_spec(self) -> EnvironmentSpec:
        return EnvironmentSpec(kind=self.environment, horizon=self.horizon, seed=self.seed,
                               dimension=self.dimension, segments=self.segments, values=self.values,
                               change_points=self.change_points, theta=self.theta, radius=self.radius)

    # -- file format -------------------------------------------------------

    _SECTIONS = {
        "experiment": ("algorithm", "horizon", "eta"),
        "environment": ("environment", "seed", "dimension", "segments", "values",
                        "change_points", "theta", "radius"),
        "comparator": ("policy", "comparator_file"),
        "output": ("trace", "report"),
    }
    _RENAMES = {"environment": "kind", "comparator_file": "file"}

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, names in self._SECTIONS.items():
            cp[section] = {}
            for name in names:
                value = getattr(self, name)
                if value is None:
                    continue
                if isinstance(value, list):
                    value = ", ".join(repr(v) for v in value)
                elif isinstance(value, float):
                    value = repr(value)
                cp[section][self._RENAMES.get(name, name)] = str(value)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        kwargs = {}
        for section, names in cls._SECTIONS.items():
            if not cp.has_section(section):
                continue
            known = {cls._RENAMES.get(n, n): n for n in names}
            for key, raw in cp[section].items():
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                kwargs[known[key]] = _parse(known[key], raw)
        for required in ("algorithm", "environment", "horizon"):
            if required not in kwargs:
                raise ConfigError(f"config is missing {required!r}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            return cls.from_text(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())


def _parse(name: str, raw: str):
    raw = raw.strip()
    try:
        if name in ("horizon", "seed", "dimension", "segments"):
            return int(raw)
        if name == "radius":
            return float(raw)
        if name in ("values", "theta"):
            return [float(x) for x in raw.split(",") if x.strip()]
        if name == "change_points":
            return [int(x) for x in raw.split(",") if x.strip()]
        if name == "eta":
            return raw if raw == "auto" else float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw
