"""Run configuration: defaults < TOML file < command-line flags."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import get_pair, list_pairs
from .errors import ConfigurationError

SUBCOMMANDS = ("solve", "bmo", "campanato", "czsweep", "fscheck", "pinf", "suite")


@dataclass
class RunConfig:
    subcommand: str = "suite"
    pairs: list[str] = field(default_factory=list_pairs)
    N: list[int] = field(default_factory=lambda: [64, 128, 256])
    p: list[float] = field(default_factory=lambda: [1.5, 2.0, 4.0, 8.0])
    eta: float = 0.5
    r0: float = 0.25
    rho: float = 0.5
    K: int = 6
    data_r0: float = 1.0
    min_cells: int = 32
    M: int = 5
    r_base: float = 0.5
    mode: str = "lsq"
    hessian: str = "analytic"
    variant: str = "corollary"
    tol: float = 1e-10
    max_iter: int = 50
    x0: list[float] = field(default_factory=lambda: [0.0, 0.0])
    centers: str = "strided"
    max_centers: int = 4096
    out: str = "oscillometer-out"
    workers: int = 0
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"subcommand: unknown value {self.subcommand!r}")
        if not self.pairs:
            raise ConfigurationError("pairs: at least one pair id is required")
        for pid in self.pairs:
            try:
                get_pair(pid)
            except ConfigurationError:
                raise ConfigurationError(f"pairs: unknown pair id {pid!r}") from None
        if not self.N or any(n < 8 or n % 2 for n in self.N):
            raise ConfigurationError(f"N: every grid size must be even and >= 8, got {self.N}")
        if not self.p or any(not (1 < q < math.inf) for q in self.p):
            raise ConfigurationError(f"p: every exponent must satisfy 1 < p < inf, got {self.p}")
        if not 0 < self.eta < 1:
            raise ConfigurationError(f"eta: must lie in (0, 1), got {self.eta}")
        if not 0 < self.rho < 1:
            raise ConfigurationError(f"rho: must lie in (0, 1), got {self.rho}")
        for key in ("r0", "data_r0", "r_base", "tol"):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f"{key}: must be positive, got {getattr(self, key)}")
        for key in ("K", "M", "min_cells", "max_iter", "max_centers"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key}: must be >= 1, got {getattr(self, key)}")
        choices = {"mode": ("lsq", "key_step", "keystep"), "hessian": ("analytic", "solved"),
                   "variant": ("corollary", "sharp"), "centers": ("strided", "full")}
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigurationError(f"{key}: expected one of {allowed}, got {getattr(self, key)!r}")
        if self.mode == "keystep":
            self.mode = "key_step"
        if len(self.x0) != 2 or math.hypot(*self.x0) >= 1:
            raise ConfigurationError(f"x0: must be a point inside the unit disk, got {self.x0}")
        if self.workers < 0:
            raise ConfigurationError(f"workers: must be >= 0, got {self.workers}")
        return self

    @property
    def effective_workers(self) -> int:
        return self.workers or (os.cpu_count() or 1)

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, value: Any) -> Any:
    default = getattr(RunConfig(), key)
    try:
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            elif not isinstance(value, (list, tuple)):
                value = [value]
            kind = {"pairs": str, "N": int, "p": float, "x0": float}[key]
            if kind is int and any(isinstance(v, float) and not v.is_integer() for v in value):
                raise ValueError("non-integer")
            return [kind(v.strip() if isinstance(v, str) else v) for v in value]
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError("non-integer")
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: cannot interpret {value!r}") from None


def from_mapping(data: dict[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Overlay ``data`` on ``base``; unknown keys are rejected."""
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    for key, value in data.items():
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        setattr(cfg, key, _coerce(key, value))
    return cfg


def load_config(path: str | os.PathLike) -> dict[str, Any]:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config: {path} is not valid TOML ({exc})") from None
